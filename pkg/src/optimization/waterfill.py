"""Capacity-maximizing waterfilling over eigenchannels."""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..channel import Covariance, SvdDecomposition, achievable_rate

logger = logging.getLogger(__name__)

LN2 = np.log(2.0)


@dataclass(frozen=True)
class PowerAllocation:
    """Per-eigenchannel powers in descending-gain order."""
    powers: np.ndarray
    active_count: int
    water_level: Optional[float] = None

    def __post_init__(self):
        powers = np.array(self.powers, dtype=float)
        if powers.ndim != 1:
            raise ValueError(f"Powers must be a vector, got shape {powers.shape}")
        if np.any(powers < 0):
            raise ValueError(f"Powers must be non-negative, got {powers}")
        powers.setflags(write=False)
        object.__setattr__(self, "powers", powers)

    @property
    def total(self) -> float:
        return float(np.sum(self.powers))

    @property
    def rank(self) -> int:
        return int(np.count_nonzero(self.powers > 0))

    @classmethod
    def beamforming(cls, r: int, p_t: float) -> "PowerAllocation":
        """All power on the strongest eigenchannel."""
        powers = np.zeros(r)
        powers[0] = p_t
        return cls(powers=powers, active_count=1)

    @classmethod
    def uniform(cls, r: int, p_t: float) -> "PowerAllocation":
        return cls(powers=np.full(r, p_t / r), active_count=r)


def _validate(p_t: float, sigma2: float):
    if p_t <= 0:
        raise ValueError(f"Transmit power must be positive, got {p_t}")
    if sigma2 <= 0:
        raise ValueError(f"Noise power must be positive, got {sigma2}")


def _rank_from_gains(gains: np.ndarray, p_t: float, noise: float) -> int:
    inv = noise / gains[gains > 0]
    if inv.size == 0:
        return 0
    k = np.arange(1, inv.size + 1)
    remaining = p_t - (k * inv - np.cumsum(inv))
    return int(np.nonzero(remaining > 0)[0][-1] + 1)


def waterfill_gains(gains: np.ndarray, p_t: float, noise: float) -> PowerAllocation:
    """Waterfilling on raw power gains (descending) against an effective noise power."""
    _validate(p_t, noise)
    gains = np.asarray(gains, dtype=float)
    k = _rank_from_gains(gains, p_t, noise)
    powers = np.zeros(gains.shape[0])
    if k == 0:
        logger.warning("Waterfilling over a channel with no usable eigenmode")
        return PowerAllocation(powers=powers, active_count=0)

    inv = noise / gains[:k]
    level = (p_t + float(np.sum(inv))) / k
    powers[:k] = np.clip(level - inv, 0.0, None)
    return PowerAllocation(powers=powers, active_count=k, water_level=level)


def wf_rank(lam: Sequence[float], p_t: float, sigma2: float) -> int:
    """
    Number of active channels: the largest k whose inverse-gain gaps
    sum_{i<k} (sigma2/lambda_k^2 - sigma2/lambda_i^2) leave the budget strictly positive.
    """
    _validate(p_t, sigma2)
    return _rank_from_gains(np.asarray(lam, dtype=float) ** 2, p_t, sigma2)


def waterfill(lam: Sequence[float], p_t: float, sigma2: float) -> PowerAllocation:
    """
    Waterfilling allocation with the active set from ``wf_rank``.

    Channels with zero gain receive no power.
    """
    return waterfill_gains(np.asarray(lam, dtype=float) ** 2, p_t, sigma2)


def waterfill_rate(gains: np.ndarray, p_t: float, noise: float) -> float:
    """Waterfilling rate in bps/Hz for raw gains and an effective noise power."""
    allocation = waterfill_gains(gains, p_t, noise)
    return float(np.sum(np.log1p(allocation.powers * gains / noise)) / LN2)


def max_rate(svd: SvdDecomposition, p_t: float, sigma2: float) -> float:
    """R_max: rate at rho = 0 under the waterfilling covariance."""
    allocation = waterfill(svd.lam, p_t, sigma2)
    return achievable_rate(svd, Covariance.from_powers(svd, allocation.powers), 0.0, sigma2)
