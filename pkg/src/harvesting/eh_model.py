"""RF-to-DC rectification models mapping received EH power to harvested DC power."""

import logging
from enum import Enum
from typing import Any, Optional, Protocol, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.optimize import brentq
from scipy.special import expit

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

DEFAULT_SENSITIVITY_W = 1e-5  # -20 dBm
DEFAULT_SATURATION_W = 0.024
DEFAULT_PEAK_EFFICIENCY = 0.5


class Rectifier(Protocol):
    def rectify(self, p_re: ArrayLike) -> ArrayLike:
        ...


class EhKind(str, Enum):
    LINEAR = "linear"
    SATURATING = "saturating"


def _saturating_raw(p: np.ndarray, p_sat: float, sensitivity: float,
                    steepness: float) -> np.ndarray:
    """Logistic curve shifted to pass through the origin, normalized to plateau at p_sat."""
    f0 = expit(-steepness * sensitivity)
    return p_sat * (expit(steepness * (p - sensitivity)) - f0) / expit(steepness * sensitivity)


def _peak_efficiency(p_sat: float, sensitivity: float, steepness: float) -> float:
    grid = np.geomspace(sensitivity * 1e-3, p_sat * 1e3, 4001)
    return float(np.max(_saturating_raw(grid, p_sat, sensitivity, steepness) / grid))


def calibrate_steepness(p_saturation: float, sensitivity: float,
                        peak_efficiency: float = DEFAULT_PEAK_EFFICIENCY) -> float:
    """Steepness giving the unclipped curve a maximum P_H / P_RE equal to ``peak_efficiency``."""
    def gap(log_a: float) -> float:
        return _peak_efficiency(p_saturation, sensitivity, float(np.exp(log_a))) - peak_efficiency

    lo = np.log(1e-3 * peak_efficiency / p_saturation)
    hi = np.log(1e3 / sensitivity)
    log_a = brentq(gap, lo, hi, xtol=1e-10)
    steepness = float(np.exp(log_a))
    logger.debug(
        f"Calibrated EH steepness {steepness:.6g} 1/W for peak efficiency {peak_efficiency}"
    )
    return steepness


class EhModel(BaseModel):
    """
    Monotone rectifier curve.

    ``linear``: P_H = eta_const * P_RE.
    ``saturating``: logistic saturation at ``p_saturation`` around ``sensitivity``,
    clipped so that P_H never exceeds P_RE.
    """
    model_config = ConfigDict(frozen=True)

    kind: EhKind = Field(default=EhKind.SATURATING)
    eta_const: Optional[float] = Field(default=None, gt=0.0, le=1.0)
    p_saturation: Optional[float] = Field(default=DEFAULT_SATURATION_W, gt=0.0)
    sensitivity: Optional[float] = Field(default=DEFAULT_SENSITIVITY_W, gt=0.0)
    steepness: Optional[float] = Field(default=None, gt=0.0)
    peak_efficiency: float = Field(default=DEFAULT_PEAK_EFFICIENCY, gt=0.0, le=1.0)

    @model_validator(mode="before")
    @classmethod
    def fill_defaults(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        data = dict(data)
        kind = EhKind(data.get("kind", EhKind.SATURATING))
        data["kind"] = kind
        if kind == EhKind.LINEAR:
            if data.get("eta_const") is None:
                data["eta_const"] = DEFAULT_PEAK_EFFICIENCY
        else:
            # Explicit nulls mean "use the default"
            if data.get("p_saturation") is None:
                data["p_saturation"] = DEFAULT_SATURATION_W
            if data.get("sensitivity") is None:
                data["sensitivity"] = DEFAULT_SENSITIVITY_W
        if kind == EhKind.SATURATING and data.get("steepness") is None:
            p_sat = data["p_saturation"]
            sensitivity = data["sensitivity"]
            peak = data.get("peak_efficiency", DEFAULT_PEAK_EFFICIENCY)
            # Out-of-range values are left for field validation to report
            if p_sat > 0 and sensitivity > 0 and 0 < peak <= 1:
                data["steepness"] = calibrate_steepness(p_sat, sensitivity, peak)
        return data

    @model_validator(mode="after")
    def check_curve(self) -> "EhModel":
        p_max = 10.0 * (self.p_saturation or 1.0)
        if not check_monotone(self, p_max, 1000):
            raise ValueError(f"{self.kind.value} EH model is not non-decreasing on [0, {p_max}]")
        return self

    @classmethod
    def linear(cls, eta_const: float = DEFAULT_PEAK_EFFICIENCY) -> "EhModel":
        return cls(kind=EhKind.LINEAR, eta_const=eta_const)

    @classmethod
    def saturating(cls, p_saturation: float = DEFAULT_SATURATION_W,
                   sensitivity: float = DEFAULT_SENSITIVITY_W,
                   steepness: Optional[float] = None,
                   peak_efficiency: float = DEFAULT_PEAK_EFFICIENCY) -> "EhModel":
        return cls(kind=EhKind.SATURATING, p_saturation=p_saturation, sensitivity=sensitivity,
                   steepness=steepness, peak_efficiency=peak_efficiency)

    def rectify(self, p_re: ArrayLike) -> ArrayLike:
        """Harvested DC power for received EH power ``p_re`` (watts)."""
        p = np.asarray(p_re, dtype=float)
        if np.any(p < 0):
            raise ValueError("Received EH power must be non-negative")
        if self.kind == EhKind.LINEAR:
            out = self.eta_const * p
        else:
            raw = _saturating_raw(p, self.p_saturation, self.sensitivity, self.steepness)
            out = np.clip(raw, 0.0, p)
        return float(out) if out.ndim == 0 else out

    def efficiency(self, p_re: ArrayLike) -> ArrayLike:
        """P_H / P_RE, zero at zero input."""
        p = np.asarray(p_re, dtype=float)
        harvested = np.asarray(self.rectify(p), dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            eta = np.where(p > 0, harvested / np.where(p > 0, p, 1.0), 0.0)
        return float(eta) if eta.ndim == 0 else eta

    def describe(self) -> str:
        if self.kind == EhKind.LINEAR:
            return f"linear(eta={self.eta_const})"
        return (f"saturating(p_sat={self.p_saturation:g} W, sensitivity={self.sensitivity:g} W, "
                f"steepness={self.steepness:.6g} 1/W)")


def check_monotone(model: Rectifier, p_max: float, n_grid: int) -> bool:
    """True iff ``model.rectify`` is non-decreasing on an n_grid-point grid over [0, p_max]."""
    if p_max <= 0 or n_grid < 2:
        raise ValueError(f"Need p_max > 0 and n_grid >= 2, got {p_max}, {n_grid}")
    grid = np.linspace(0.0, p_max, n_grid)
    values = np.array([model.rectify(float(p)) for p in grid])
    slack = 1e-15 * max(float(np.max(np.abs(values))), 1e-300)
    return bool(np.all(np.diff(values) >= -slack))
