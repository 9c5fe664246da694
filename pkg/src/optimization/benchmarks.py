"""Semi-adaptive baselines: optimal UPS ratio for a fixed covariance (OPS) and
optimal covariance for a fixed UPS ratio (OTCM)."""

import logging
import math

import numpy as np
from scipy.optimize import brentq

from ..channel import Covariance, SvdDecomposition, eigen_rates
from ..errors import InfeasibleRateError
from .joint_opt import inner_max_received_power
from .problem import Branch, JointSolution, Scheme, SwiptProblem
from .waterfill import PowerAllocation, waterfill

logger = logging.getLogger(__name__)

LN2 = math.log(2.0)
OPS_TOLERANCE = 1e-12
BUDGET_TOLERANCE = 1e-9
MIN_LOG_SHARE = -700.0

OPS_COVARIANCES = ("waterfilling", "equal", "eb")


def ops_covariance(svd: SvdDecomposition, p_t: float, sigma2: float,
                   kind: str = "waterfilling") -> Covariance:
    """Fixed transmit covariance used by OPS."""
    if kind == "waterfilling":
        powers = waterfill(svd.lam, p_t, sigma2).powers
    elif kind == "equal":
        powers = PowerAllocation.uniform(svd.r, p_t).powers
    elif kind == "eb":
        powers = PowerAllocation.beamforming(svd.r, p_t).powers
    else:
        raise ValueError(f"Unknown OPS covariance '{kind}', expected one of {OPS_COVARIANCES}")
    return Covariance.from_powers(svd, powers)


def _rate_at(prob: SwiptProblem, powers: np.ndarray, s: float) -> float:
    """Rate with decoder share ``s`` = 1 - rho."""
    if s <= 0.0:
        return 0.0
    return float(eigen_rates(prob.gains, powers, 0.0, prob.sigma2 / s))


def _benchmark_solution(prob: SwiptProblem, powers: np.ndarray, s: float,
                        scheme: Scheme) -> JointSolution:
    allocation = PowerAllocation(powers=powers, active_count=int(np.count_nonzero(powers > 0)))
    rho = 1.0 - s
    return JointSolution(
        allocation=allocation,
        rho=rho,
        branch=Branch.EB if allocation.rank <= 1 else Branch.SM,
        rate_achieved=_rate_at(prob, powers, s),
        p_re=rho * float(np.dot(powers, prob.gains)),
        scheme=scheme,
        id_share=s,
    )


def _ops_share(prob: SwiptProblem, powers: np.ndarray) -> float:
    """Smallest decoder share meeting R, found on ln s."""

    def gap(u: float) -> float:
        return _rate_at(prob, powers, math.exp(u)) - prob.rate_req

    u_lo = -3.0
    while gap(u_lo) >= 0.0:
        u_lo -= 3.0
        if u_lo < MIN_LOG_SHARE:
            return math.exp(MIN_LOG_SHARE)
    u = brentq(gap, u_lo, 0.0, xtol=OPS_TOLERANCE, rtol=1e-15, maxiter=500)
    # brentq may land just below the root; step to the feasible side
    while gap(u) < 0.0 and u < 0.0:
        u = min(u + OPS_TOLERANCE, 0.0)
    return math.exp(u)


def solve_ops(prob: SwiptProblem, fixed_cov: Covariance) -> JointSolution:
    """
    Largest UPS ratio meeting R with the covariance held fixed.

    Closed form for rank-1 covariances, root search on ln(1 - rho) otherwise.

    Raises:
        InfeasibleRateError: ``fixed_cov`` cannot reach R even at rho = 0
    """
    powers = np.asarray(fixed_cov.powers, dtype=float)
    if powers.shape[0] != prob.r:
        raise ValueError(f"Covariance has {powers.shape[0]} powers for rank {prob.r}")
    if fixed_cov.total_power > prob.p_t * (1.0 + BUDGET_TOLERANCE):
        raise ValueError(
            f"Covariance uses {fixed_cov.total_power:.6g} W over the {prob.p_t:.6g} W budget"
        )

    best_rate = _rate_at(prob, powers, 1.0)
    if prob.rate_req > best_rate:
        raise InfeasibleRateError(prob.rate_req, best_rate, context="OPS at rho=0")

    active = np.nonzero(powers > 0)[0]
    if prob.rate_req <= 0.0:
        s = 0.0
    elif active.size == 1:
        j = int(active[0])
        shortfall = math.expm1(prob.rate_req * LN2) * prob.sigma2 / (powers[j] * prob.gains[j])
        s = min(1.0, shortfall)
    else:
        s = _ops_share(prob, powers)
    return _benchmark_solution(prob, powers, s, Scheme.OPS)


def solve_otcm(prob: SwiptProblem, fixed_rho: float) -> JointSolution:
    """
    Received-power-optimal covariance at a fixed UPS ratio.

    Raises:
        InfeasibleRateError: R above the waterfilling rate at ``fixed_rho``
    """
    if not 0.0 <= fixed_rho < 1.0:
        raise ValueError(f"OTCM needs rho in [0, 1), got {fixed_rho}")
    allocation = inner_max_received_power(prob.svd, fixed_rho, prob.p_t, prob.sigma2,
                                          prob.rate_req)
    return _benchmark_solution(prob, np.asarray(allocation.powers), 1.0 - fixed_rho,
                               Scheme.OTCM)
