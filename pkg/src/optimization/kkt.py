"""KKT residual report for a joint (covariance, UPS ratio) solution."""

import logging
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from .problem import JointSolution, SwiptProblem

logger = logging.getLogger(__name__)

LN2 = np.log(2.0)

KKT_ACCEPT_THRESHOLD = 1e-6


@dataclass(frozen=True)
class KktReport:
    """
    Normalized KKT residuals of the Lagrangian

        L = rho * sum_i p_i g_i + mu * (rate - R) + nu * (P_T - sum_i p_i)

    Derivatives with respect to rho and complementary-slackness products are
    divided by P_T * g_1; derivatives with respect to p_i by g_1.
    """
    d_rho: float
    d_powers: float
    inactive_gradient: float
    rate_slackness: float
    power_slackness: float
    mu_nonnegative: bool
    nu_nonnegative: bool

    @property
    def residual(self) -> float:
        """Largest stationarity / complementarity violation."""
        return max(self.d_rho, self.d_powers, self.rate_slackness, self.power_slackness)

    def passes(self, threshold: float = KKT_ACCEPT_THRESHOLD) -> bool:
        return self.residual <= threshold and self.mu_nonnegative and self.nu_nonnegative

    def to_dict(self) -> Dict[str, float]:
        return {
            "d_rho": self.d_rho,
            "d_powers": self.d_powers,
            "inactive_gradient": self.inactive_gradient,
            "rate_slackness": self.rate_slackness,
            "power_slackness": self.power_slackness,
            "mu_nonnegative": self.mu_nonnegative,
            "nu_nonnegative": self.nu_nonnegative,
            "residual": self.residual,
        }


def lagrangian_gradients(prob: SwiptProblem, powers: np.ndarray, rho: float,
                         mu: float, nu: float, id_share: Optional[float] = None):
    """(dL/drho, dL/dp_i) at the given point, unnormalized."""
    g = prob.gains
    s = 1.0 - rho if id_share is None else id_share
    snr_denominator = LN2 * (prob.sigma2 + s * powers * g)
    d_rho = float(np.dot(powers, g) - mu * np.sum(powers * g / snr_denominator))
    d_powers = rho * g + mu * s * g / snr_denominator - nu
    return d_rho, d_powers


def kkt_residuals(prob: SwiptProblem, sol: JointSolution) -> KktReport:
    """
    Evaluate stationarity on the active eigenchannels, dual feasibility on the
    inactive ones, and complementary slackness of the rate and power constraints.

    At rho = 0 or rho = 1 only the component of dL/drho pointing into the
    feasible interval counts.
    """
    if sol.mu is None or sol.nu is None:
        raise ValueError(f"{sol.scheme.value} solution carries no multipliers")

    powers = np.asarray(sol.allocation.powers, dtype=float)
    scale = prob.power_scale
    g1 = prob.g1
    rho = sol.rho

    s = sol.id_share
    d_rho, d_powers = lagrangian_gradients(prob, powers, rho, sol.mu, sol.nu, id_share=s)
    if s >= 1.0:
        d_rho = max(d_rho, 0.0)
    elif s <= 0.0:
        d_rho = min(d_rho, 0.0)

    active = powers > 0
    d_active = float(np.max(np.abs(d_powers[active]))) if np.any(active) else 0.0
    inactive = ~active & (prob.gains > 0)
    d_inactive = float(np.max(d_powers[inactive])) if np.any(inactive) else 0.0

    rate = float(np.sum(np.log1p(s * powers * prob.gains / prob.sigma2)) / LN2)
    rate_slack = sol.mu * (rate - prob.rate_req)
    power_slack = sol.nu * (prob.p_t - float(np.sum(powers)))

    return KktReport(
        d_rho=abs(d_rho) / scale,
        d_powers=d_active / g1,
        inactive_gradient=max(d_inactive, 0.0) / g1,
        rate_slackness=abs(rate_slack) / scale,
        power_slackness=abs(power_slack) / scale,
        mu_nonnegative=sol.mu >= 0,
        nu_nonnegative=sol.nu >= 0,
    )
