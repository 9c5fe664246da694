"""Received power and achievable rate on the eigenchannels of a decomposition."""

import logging
from dataclasses import dataclass

import numpy as np

from ..errors import DimensionMismatchError
from .decomposition import SvdDecomposition

logger = logging.getLogger(__name__)

LN2 = np.log(2.0)


def dbm_to_watts(dbm: float) -> float:
    """P[W] = 10^((dBm - 30) / 10)."""
    return float(10.0 ** ((dbm - 30.0) / 10.0))


@dataclass(frozen=True)
class Covariance:
    """Transmit covariance S = V diag(powers) V^H kept in factored form."""
    eigenbasis: np.ndarray
    powers: np.ndarray

    def __post_init__(self):
        basis = np.array(self.eigenbasis, dtype=complex)
        powers = np.array(self.powers, dtype=float)
        if powers.ndim != 1 or basis.ndim != 2 or basis.shape[1] != powers.shape[0]:
            raise DimensionMismatchError(
                f"Eigenbasis {basis.shape} does not match {powers.shape[0]} powers"
            )
        if not np.all(np.isfinite(powers)) or np.any(powers < 0):
            raise ValueError(f"Powers must be finite and non-negative, got {powers}")
        basis.setflags(write=False)
        powers.setflags(write=False)
        object.__setattr__(self, "eigenbasis", basis)
        object.__setattr__(self, "powers", powers)

    @classmethod
    def from_powers(cls, svd: SvdDecomposition, powers) -> "Covariance":
        return cls(eigenbasis=svd.v, powers=np.asarray(powers, dtype=float))

    @property
    def total_power(self) -> float:
        return float(np.sum(self.powers))

    def matrix(self) -> np.ndarray:
        return (self.eigenbasis * self.powers) @ self.eigenbasis.conj().T


def _check_shapes(svd: SvdDecomposition, cov: Covariance):
    if cov.powers.shape[0] != svd.r or cov.eigenbasis.shape[0] != svd.n_t:
        raise DimensionMismatchError(
            f"Covariance with {cov.powers.shape[0]} powers over {cov.eigenbasis.shape[0]} "
            f"antennas does not fit a rank-{svd.r} decomposition with {svd.n_t} TX antennas"
        )


def received_rf_power(svd: SvdDecomposition, cov: Covariance) -> float:
    """P_R = sum_i p_i lambda_i^2 = tr(H S H^H)."""
    _check_shapes(svd, cov)
    return float(np.dot(cov.powers, svd.gains))


def eigen_rates(gains: np.ndarray, powers: np.ndarray, rho: float, sigma2: float) -> np.ndarray:
    """Sum-log rate over the last axis of ``powers``; batches of allocations allowed."""
    snr = (1.0 - rho) * np.asarray(powers, dtype=float) * gains / sigma2
    return np.sum(np.log1p(snr), axis=-1) / LN2


def achievable_rate(svd: SvdDecomposition, cov: Covariance, rho: float, sigma2: float) -> float:
    """Rate in bps/Hz of the ID branch receiving the (1 - rho) share of the signal."""
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"rho must lie in [0, 1], got {rho}")
    if sigma2 <= 0:
        raise ValueError(f"Noise power must be positive, got {sigma2}")
    _check_shapes(svd, cov)
    return float(eigen_rates(svd.gains, cov.powers, rho, sigma2))


def received_power_from_matrix(h: np.ndarray, s: np.ndarray) -> float:
    """tr(H S H^H) for an arbitrary covariance matrix."""
    return float(np.real(np.trace(h @ s @ h.conj().T)))


def rate_from_matrix(h: np.ndarray, s: np.ndarray, rho: float, sigma2: float) -> float:
    """log2 det(I + (1 - rho) H S H^H / sigma2) for an arbitrary covariance matrix."""
    n_r = h.shape[0]
    if s.shape != (h.shape[1], h.shape[1]):
        raise DimensionMismatchError(f"Covariance {s.shape} does not fit channel {h.shape}")
    m = np.eye(n_r) + (1.0 - rho) * (h @ s @ h.conj().T) / sigma2
    sign, logdet = np.linalg.slogdet(m)
    if np.real(sign) <= 0:
        raise ValueError("Covariance is not positive semidefinite")
    return float(logdet / LN2)
