"""CSV and JSON output of sweep results."""

import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Optional

import pandas as pd
from pydantic import BaseModel, Field

from ..config import settings
from .sweep import SweepResult

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


class CaseSummary(BaseModel):
    case: str
    n_realizations: int
    mean_r_max: float
    std_r_max: float
    mean_r_th: float
    std_r_th: float


class AggregateRow(BaseModel):
    case: str
    rate_index: int
    scheme: str
    mean_rate: Optional[float] = None
    mean_rate_fraction: Optional[float] = None
    mean_p_re: Optional[float] = None
    std_p_re: Optional[float] = None
    mean_p_h: Optional[float] = None
    std_p_h: Optional[float] = None
    mean_rho: Optional[float] = None
    mean_powers: List[Optional[float]] = Field(default_factory=list)
    n_feasible: int
    n_infeasible: int


class GainRow(BaseModel):
    case: str
    rate_index: int
    benchmark: str
    mean_rate: Optional[float] = None
    mean_p_re_joint: Optional[float] = None
    mean_p_re_benchmark: Optional[float] = None
    gain_pct: Optional[float] = None
    n_paired: int


class SpotCheckSummary(BaseModel):
    checked: int = 0
    violations: List[str] = Field(default_factory=list)


class SweepSummary(BaseModel):
    """Versioned JSON document written next to the per-record CSV."""
    schema_version: int = SCHEMA_VERSION
    seed: int
    config: Dict[str, Any]
    n_records: int
    n_infeasible: int
    cases: List[CaseSummary] = Field(default_factory=list)
    aggregates: List[AggregateRow] = Field(default_factory=list)
    gains: List[GainRow] = Field(default_factory=list)
    spot_check: SpotCheckSummary = Field(default_factory=SpotCheckSummary)


def _clean(value: Any) -> Any:
    """NaN and numpy scalars to JSON-friendly values."""
    if value is None:
        return None
    if hasattr(value, "item"):
        value = value.item()
    if isinstance(value, float) and math.isnan(value):
        return None
    return value


def _rows(frame: pd.DataFrame) -> List[Dict[str, Any]]:
    return [{k: _clean(v) for k, v in row.items()} for row in frame.to_dict(orient="records")]


def build_summary(result: SweepResult) -> SweepSummary:
    aggregates = []
    for row in _rows(result.aggregates):
        power_keys = sorted((k for k in row if k.startswith("mean_p_") and k[7:].isdigit()),
                            key=lambda k: int(k[7:]))
        row["mean_powers"] = [row.pop(k) for k in power_keys]
        aggregates.append(AggregateRow(**row))

    return SweepSummary(
        seed=result.config.get("rng_seed", 0),
        config=result.config,
        n_records=len(result.records),
        n_infeasible=result.n_infeasible,
        cases=[CaseSummary(**row) for row in _rows(result.case_summary)],
        aggregates=aggregates,
        gains=[GainRow(**row) for row in _rows(result.gains)],
        spot_check=SpotCheckSummary(checked=result.spot_checked,
                                    violations=list(result.violations)),
    )


def write_csv(result: SweepResult, path: Path) -> Path:
    """One row per (realization, rate, scheme); header only when there are no records."""
    path.parent.mkdir(parents=True, exist_ok=True)
    result.records.to_csv(path, index=False)
    logger.info(f"Wrote {len(result.records)} record(s) to {path}")
    return path


def write_json(result: SweepResult, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    summary = build_summary(result)
    path.write_text(summary.model_dump_json(indent=2))
    logger.info(f"Wrote summary to {path}")
    return path


def emit(result: SweepResult, output_path: str, output_format: str = "both") -> List[Path]:
    """
    Write ``<output_path>.csv`` and/or ``<output_path>.json``.

    A bare file name is placed under ``SWIPT_OUTPUT_DIR``.

    Args:
        output_format: "csv", "json" or "both"
    """
    if output_format not in ("csv", "json", "both"):
        raise ValueError(f"Unknown output format '{output_format}'")
    base = Path(output_path)
    if not base.is_absolute() and base.parent == Path("."):
        base = Path(settings.output_dir) / base
    written = []
    if output_format in ("csv", "both"):
        written.append(write_csv(result, base.with_suffix(".csv")))
    if output_format in ("json", "both"):
        written.append(write_json(result, base.with_suffix(".json")))
    return written


def load_summary(path: Path) -> SweepSummary:
    return SweepSummary.model_validate_json(Path(path).read_text())
