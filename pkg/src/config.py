"""Configuration management for the SWIPT optimizer."""

import logging
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union

import yaml
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from .channel import dbm_to_watts
from .errors import ConfigError
from .harvesting import EhModel
from .optimization.benchmarks import OPS_COVARIANCES
from .optimization.problem import Scheme

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_FILE = "sweep_config.yaml"


class Settings(BaseSettings):
    """Process-level settings loaded from environment variables (prefix SWIPT_)."""

    model_config = SettingsConfigDict(
        env_prefix="SWIPT_", env_file=".env", env_file_encoding="utf-8", extra="ignore"
    )

    log_level: str = Field(default="INFO")
    config_dir: str = Field(default="config")
    n_workers: int = Field(default=0, ge=0)  # 0 = one worker per CPU
    output_dir: str = Field(default="results")

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        level = v.upper()
        if level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ValueError(f"Unknown log level '{v}'")
        return level


class RateGridConfig(BaseModel):
    """Either fractions of each realization's R_max (auto) or absolute rates (fixed)."""
    mode: Literal["auto", "fixed"] = "auto"
    points: int = Field(default=20, ge=1)
    max_fraction: float = Field(default=0.98, gt=0.0, le=1.0)
    values: List[float] = Field(default_factory=list)

    @model_validator(mode="after")
    def check_values(self) -> "RateGridConfig":
        if self.mode == "fixed":
            if not self.values:
                raise ValueError("rate_grid.values is required when mode is 'fixed'")
            if any(v < 0 for v in self.values):
                raise ValueError("rate_grid.values must be non-negative")
        return self

    def fractions(self) -> List[float]:
        """Auto-mode grid: points evenly spaced from 0 to max_fraction."""
        if self.points == 1:
            return [0.0]
        step = self.max_fraction / (self.points - 1)
        return [i * step for i in range(self.points)]


class BenchmarkConfig(BaseModel):
    """Fixed quantities of the semi-adaptive baselines."""
    ops_covariance: str = Field(default="waterfilling")
    otcm_rho: float = Field(default=0.5, ge=0.0, lt=1.0)

    @field_validator("ops_covariance")
    @classmethod
    def validate_ops_covariance(cls, v: str) -> str:
        if v not in OPS_COVARIANCES:
            raise ValueError(f"ops_covariance must be one of {OPS_COVARIANCES}, got '{v}'")
        return v


class CaseConfig(BaseModel):
    """Per-case overrides of the channel and noise parameters."""
    label: str
    theta: Optional[float] = Field(default=None, gt=0.0)
    sigma2_dbm: Optional[float] = None
    n_r: Optional[int] = Field(default=None, ge=1)
    n_t: Optional[int] = Field(default=None, ge=1)


class CaseSpec(BaseModel):
    """Fully resolved case."""
    label: str
    n_r: int
    n_t: int
    theta: float
    sigma2_dbm: float

    @property
    def sigma2_watts(self) -> float:
        return dbm_to_watts(self.sigma2_dbm)


class ValidateConfig(BaseModel):
    """Size of the oracle suite run by the `validate` subcommand."""
    n_instances: int = Field(default=50, ge=1)
    rate_levels: int = Field(default=5, ge=1)
    n_power_points: int = Field(default=400, ge=2)
    n_rho_points: int = Field(default=400, ge=2)
    n_unimodality: int = Field(default=200, ge=10)
    psd_samples: int = Field(default=1000, ge=1)


class SimConfig(BaseModel):
    """Monte Carlo experiment configuration (one YAML file in config/)."""
    n_r: int = Field(default=4, ge=1)
    n_t: int = Field(default=4, ge=1)
    theta: float = Field(default=0.1, gt=0.0)
    sigma2_dbm: float = -70.0
    p_t_watts: float = Field(default=10.0, gt=0.0)
    rate_grid: RateGridConfig = Field(default_factory=RateGridConfig)
    n_realizations: int = Field(default=1000, ge=1)
    rng_seed: int = Field(default=2024, ge=0, lt=2 ** 64)
    schemes: List[Scheme] = Field(default_factory=lambda: [Scheme.JOINT, Scheme.OPS, Scheme.OTCM])
    eh_model: EhModel = Field(default_factory=EhModel)
    benchmarks: BenchmarkConfig = Field(default_factory=BenchmarkConfig)
    cases: List[CaseConfig] = Field(default_factory=list)
    spot_check_fraction: float = Field(default=0.01, ge=0.0, le=1.0)
    validate_suite: ValidateConfig = Field(default_factory=ValidateConfig, alias="validate")
    output_path: str = "results/sweep"
    output_format: Literal["csv", "json", "both"] = "both"

    model_config = {"populate_by_name": True}

    @field_validator("schemes")
    @classmethod
    def validate_schemes(cls, v: List[Scheme]) -> List[Scheme]:
        if not v:
            raise ValueError("At least one scheme is required")
        if len(set(v)) != len(v):
            raise ValueError(f"Duplicate schemes in {[s.value for s in v]}")
        return v

    @property
    def sigma2_watts(self) -> float:
        return dbm_to_watts(self.sigma2_dbm)

    def resolved_cases(self) -> List[CaseSpec]:
        """Cases with top-level values filled in; a single 'default' case when none are listed."""
        if not self.cases:
            return [CaseSpec(label="default", n_r=self.n_r, n_t=self.n_t, theta=self.theta,
                             sigma2_dbm=self.sigma2_dbm)]
        return [
            CaseSpec(
                label=case.label,
                n_r=case.n_r if case.n_r is not None else self.n_r,
                n_t=case.n_t if case.n_t is not None else self.n_t,
                theta=case.theta if case.theta is not None else self.theta,
                sigma2_dbm=case.sigma2_dbm if case.sigma2_dbm is not None else self.sigma2_dbm,
            )
            for case in self.cases
        ]

    def echo(self) -> Dict[str, Any]:
        """JSON-friendly dump of every setting."""
        return self.model_dump(mode="json", by_alias=True)


def _format_validation_error(exc: ValidationError) -> str:
    lines = []
    for err in exc.errors():
        where = ".".join(str(part) for part in err["loc"]) or "<root>"
        lines.append(f"  {where}: {err['msg']}")
    return "\n".join(lines)


def resolve_config_path(path: Union[str, Path, None], config_dir: Optional[str] = None) -> Path:
    """Explicit path if it exists, else the same name under the config directory."""
    config_dir = config_dir or settings.config_dir
    if path is None:
        return Path(config_dir) / DEFAULT_CONFIG_FILE
    candidate = Path(path)
    if candidate.exists() or candidate.is_absolute():
        return candidate
    return Path(config_dir) / candidate


def load_sim_config(path: Union[str, Path, None] = None,
                    config_dir: Optional[str] = None) -> SimConfig:
    """
    Load and validate an experiment YAML file.

    Raises:
        ConfigError: file missing, not valid YAML, or failing field validation
    """
    filepath = resolve_config_path(path, config_dir)
    try:
        with open(filepath, "r") as f:
            raw = yaml.safe_load(f) or {}
    except FileNotFoundError as e:
        raise ConfigError(f"Config file not found: {filepath}") from e
    except yaml.YAMLError as e:
        raise ConfigError(f"Config file {filepath} is not valid YAML: {e}") from e

    if not isinstance(raw, dict):
        raise ConfigError(f"Config file {filepath} must contain a mapping at top level")

    try:
        cfg = SimConfig.model_validate(raw)
    except ValidationError as e:
        raise ConfigError(f"Invalid config {filepath}:\n{_format_validation_error(e)}") from e

    logger.debug(f"Loaded config {filepath}")
    return cfg


def apply_overrides(cfg: SimConfig, seed: Optional[int] = None, out: Optional[str] = None,
                    schemes: Optional[List[str]] = None,
                    realizations: Optional[int] = None) -> SimConfig:
    """Command-line flags take precedence over file values."""
    updates: Dict[str, Any] = {}
    if seed is not None:
        updates["rng_seed"] = seed
    if out is not None:
        updates["output_path"] = out
    if schemes:
        updates["schemes"] = schemes
    if realizations is not None:
        updates["n_realizations"] = realizations
    if not updates:
        return cfg

    data = cfg.model_dump(by_alias=True)
    data.update(updates)
    try:
        return SimConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"Invalid command-line override:\n{_format_validation_error(e)}") from e


# Global instance
settings = Settings()
