"""Problem instances and solutions of the joint precoding / power-splitting design."""

from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Optional

import numpy as np

from ..channel import Covariance, SvdDecomposition
from .waterfill import PowerAllocation

SHARE_TOLERANCE = 1e-12


class Branch(str, Enum):
    """Transmit precoding regime of a solution."""
    EB = "EB"
    SM = "SM"


class Scheme(str, Enum):
    """Which design produced a solution."""
    JOINT = "joint"
    OPS = "ops"
    OTCM = "otcm"


@dataclass(frozen=True)
class SwiptProblem:
    """Channel decomposition, transmit budget P_T [W], noise power [W] and rate requirement R."""
    svd: SvdDecomposition
    p_t: float
    sigma2: float
    rate_req: float

    def __post_init__(self):
        if self.p_t <= 0:
            raise ValueError(f"Transmit power must be positive, got {self.p_t}")
        if self.sigma2 <= 0:
            raise ValueError(f"Noise power must be positive, got {self.sigma2}")
        if self.rate_req < 0:
            raise ValueError(f"Rate requirement must be non-negative, got {self.rate_req}")

    @property
    def gains(self) -> np.ndarray:
        return self.svd.gains

    @property
    def g1(self) -> float:
        return float(self.svd.gains[0])

    @property
    def r(self) -> int:
        return self.svd.r

    @property
    def eb_capacity(self) -> float:
        """Rate of energy beamforming with rho = 0."""
        return float(np.log1p(self.p_t * self.g1 / self.sigma2) / np.log(2.0))

    @property
    def power_scale(self) -> float:
        """P_T * lambda_1^2, the largest possible received power."""
        return self.p_t * self.g1

    def with_rate(self, rate_req: float) -> "SwiptProblem":
        return SwiptProblem(svd=self.svd, p_t=self.p_t, sigma2=self.sigma2, rate_req=rate_req)


@dataclass(frozen=True)
class JointSolution:
    """
    A (covariance, UPS ratio) design with its diagnostics.

    ``id_share`` is the decoder share 1 - rho. It is the primary variable: near
    rho = 1 it carries digits that ``rho`` itself cannot hold. ``mu``, ``nu`` and
    ``kkt_residual`` are only reported by the joint solver; benchmark schemes
    leave them as None.
    """
    allocation: PowerAllocation
    rho: float
    branch: Branch
    rate_achieved: float
    p_re: float
    mu: Optional[float] = None
    nu: Optional[float] = None
    kkt_residual: Optional[float] = None
    scheme: Scheme = Scheme.JOINT
    id_share: Optional[float] = None

    def __post_init__(self):
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError(f"rho must lie in [0, 1], got {self.rho}")
        if self.id_share is None:
            object.__setattr__(self, "id_share", 1.0 - self.rho)
        elif not 0.0 <= self.id_share <= 1.0:
            raise ValueError(f"id_share must lie in [0, 1], got {self.id_share}")
        if abs(self.rho + self.id_share - 1.0) > SHARE_TOLERANCE:
            raise ValueError(f"rho {self.rho} and id_share {self.id_share} do not sum to 1")
        if self.mu is not None and self.mu < 0:
            raise ValueError(f"mu must be non-negative, got {self.mu}")
        if self.nu is not None and self.nu < 0:
            raise ValueError(f"nu must be non-negative, got {self.nu}")

    @property
    def powers(self) -> np.ndarray:
        return self.allocation.powers

    def covariance(self, svd: SvdDecomposition) -> Covariance:
        return Covariance.from_powers(svd, self.allocation.powers)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "scheme": self.scheme.value,
            "branch": self.branch.value,
            "rho": self.rho,
            "id_share": self.id_share,
            "powers": [float(p) for p in self.allocation.powers],
            "rate_achieved": self.rate_achieved,
            "p_re": self.p_re,
            "mu": self.mu,
            "nu": self.nu,
            "kkt_residual": self.kkt_residual,
        }
