"""
Joint transmit covariance and UPS ratio design.

Below the rate threshold the optimum is energy beamforming (EB) with the UPS
ratio solving the rate constraint at equality. Above it, spatial multiplexing
(SM) is found by a unimodal search over the UPS ratio around a fixed-ratio
convex subproblem solved in generalized-waterfilling form.
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from ..channel import SvdDecomposition, eigen_rates
from ..errors import EbInfeasibleError, InfeasibleRateError, KktToleranceError
from .kkt import KKT_ACCEPT_THRESHOLD, kkt_residuals, lagrangian_gradients
from .problem import Branch, JointSolution, SwiptProblem
from .search import bisect_last_true, expand_bracket, golden_section_minimize
from .waterfill import PowerAllocation, max_rate, waterfill_gains, waterfill_rate

logger = logging.getLogger(__name__)

LN2 = math.log(2.0)

# Largest UPS ratio explored by the SM search is 1 - S_FLOOR
S_FLOOR = 1e-9
GOLDEN_TOLERANCE = 1e-9
THRESHOLD_TOLERANCE = 1e-6
DEGENERATE_GAP = 1e-12
RATE_SLACK = 1e-9
BRANCH_MARGIN = 1e-9
TIE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class InnerSolution:
    """Fixed-rho optimum with the multipliers of its own Lagrangian."""
    powers: np.ndarray
    active_count: int
    mu_prime: float
    nu_prime: float
    boundary: bool = False


def _rate(gains: np.ndarray, powers: np.ndarray, noise: float) -> float:
    return float(eigen_rates(gains, powers, 0.0, noise))


def _beamforming(r: int, p_t: float) -> np.ndarray:
    powers = np.zeros(r)
    powers[0] = p_t
    return powers


def _solve_inner(gains: np.ndarray, s: float, p_t: float, sigma2: float,
                 rate_req: float) -> InnerSolution:
    """
    Maximize sum_i p_i g_i s.t. sum_i log2(1 + s p_i g_i / sigma2) >= R, sum_i p_i <= P_T.

    With t = nu' - g_1 the optimum is p_i = [w / (t + g_1 - g_i) - sigma2 / (s g_i)]^+,
    where w closes the budget for a given t. The rate grows monotonically in t
    from energy beamforming (t -> 0) to waterfilling (t -> inf), so a single
    root search on ln t meets the rate equality.
    """
    r = gains.shape[0]
    g1 = float(gains[0])
    if s <= 0.0:
        if rate_req > 0:
            raise InfeasibleRateError(rate_req, 0.0, context="rho=1")
        return InnerSolution(_beamforming(r, p_t), 1, 0.0, g1)

    noise = sigma2 / s
    eb_rate = math.log1p(p_t * g1 / noise) / LN2
    if eb_rate >= rate_req:
        return InnerSolution(_beamforming(r, p_t), 1, 0.0, g1)

    m = int(np.count_nonzero(gains > 0))
    g = gains[:m]
    if m == 1:
        raise InfeasibleRateError(rate_req, eb_rate, context=f"rho={1.0 - s:.6g}")

    wf = waterfill_gains(g, p_t, noise)
    wf_rate = _rate(g, wf.powers, noise)
    if rate_req > wf_rate + RATE_SLACK:
        raise InfeasibleRateError(rate_req, wf_rate, context=f"rho={1.0 - s:.6g}")

    def padded(p: np.ndarray) -> np.ndarray:
        out = np.zeros(r)
        out[:m] = p
        return out

    if rate_req >= wf_rate:
        return InnerSolution(padded(wf.powers), wf.active_count, math.inf, math.inf, boundary=True)

    gaps = g1 - g
    tied = gaps <= TIE_TOLERANCE * g1
    gaps[tied] = 0.0
    n_tied = int(np.count_nonzero(tied))

    if n_tied > 1:
        # Tied top channels share power at no cost in received power
        limit = waterfill_gains(g[:n_tied], p_t, noise)
        limit_powers = np.zeros(m)
        limit_powers[:n_tied] = limit.powers
        if _rate(g, limit_powers, noise) >= rate_req:
            eb = _beamforming(m, p_t)

            def mix_gap(alpha: float) -> float:
                return _rate(g, (1.0 - alpha) * eb + alpha * limit_powers, noise) - rate_req

            alpha = brentq(mix_gap, 0.0, 1.0, xtol=1e-15, rtol=1e-15)
            powers = (1.0 - alpha) * eb + alpha * limit_powers
            return InnerSolution(padded(powers), int(np.count_nonzero(powers > 0)), 0.0, g1)

    c = noise / g
    cum_c = np.cumsum(c)

    def allocate(t: float):
        a = 1.0 / (t + gaps)
        levels = (p_t + cum_c) / np.cumsum(a)
        valid = levels * a - c > 0
        k = int(np.nonzero(valid)[0][-1] + 1)
        w = float(levels[k - 1])
        powers = np.zeros(m)
        powers[:k] = np.clip(w * a[:k] - c[:k], 0.0, None)
        return powers, w, k

    def rate_gap(v: float) -> float:
        powers, _, _ = allocate(math.exp(v))
        return _rate(g, powers, noise) - rate_req

    first_gap = gaps[n_tied] if n_tied < m else g1
    v0 = math.log(max(c[min(n_tied, m - 1)] * first_gap / p_t, 1e-300))

    v_lo = v0
    while rate_gap(v_lo) >= 0.0 and v_lo > -690.0:
        v_lo -= 3.0
    v_hi = v0
    while rate_gap(v_hi) < 0.0:
        v_hi += 3.0
        if v_hi > 690.0:
            return InnerSolution(padded(wf.powers), wf.active_count, math.inf, math.inf,
                                 boundary=True)

    v = brentq(rate_gap, v_lo, v_hi, xtol=1e-13, rtol=1e-15, maxiter=500)
    t = math.exp(v)
    powers, w, k = allocate(t)
    return InnerSolution(padded(powers), k, w * LN2, t + g1)


def inner_max_received_power(svd: SvdDecomposition, rho: float, p_t: float, sigma2: float,
                             rate_req: float) -> PowerAllocation:
    """
    Received-power-optimal allocation at a fixed UPS ratio.

    Raises:
        InfeasibleRateError: ``rate_req`` above the waterfilling rate at this rho
    """
    if not 0.0 <= rho < 1.0:
        raise ValueError(f"rho must lie in [0, 1), got {rho}")
    inner = _solve_inner(svd.gains, 1.0 - rho, p_t, sigma2, rate_req)
    return PowerAllocation(powers=inner.powers, active_count=inner.active_count)


def _eb_share(prob: SwiptProblem) -> float:
    """Decoder share 1 - rho at which beamforming meets R with equality."""
    shortfall = math.expm1(prob.rate_req * LN2) * prob.sigma2 / prob.power_scale
    return min(1.0, shortfall)


def _finalize(prob: SwiptProblem, powers: np.ndarray, s: float, branch: Branch,
              mu: float, nu: float) -> JointSolution:
    rho = 1.0 - s
    rate = _rate(prob.gains, powers, prob.sigma2 / s) if s > 0.0 else 0.0
    allocation = PowerAllocation(powers=powers, active_count=int(np.count_nonzero(powers > 0)))
    sol = JointSolution(
        allocation=allocation,
        rho=rho,
        branch=branch,
        rate_achieved=rate,
        p_re=rho * float(np.dot(powers, prob.gains)),
        mu=mu,
        nu=nu,
        id_share=s,
    )
    return replace(sol, kkt_residual=kkt_residuals(prob, sol).residual)


def _stationary_multipliers(prob: SwiptProblem, powers: np.ndarray, s: float):
    """(mu, nu) solving dL/drho = 0 and dL/dp_1 = 0 exactly."""
    g = prob.gains
    weights = powers * g / (LN2 * (prob.sigma2 + s * powers * g))
    mu = float(np.dot(powers, g) / np.sum(weights))
    nu = (1.0 - s) * g[0] + mu * s * g[0] / (LN2 * (prob.sigma2 + s * powers[0] * g[0]))
    return mu, nu


def solve_eb_branch(prob: SwiptProblem) -> JointSolution:
    """
    Energy beamforming with the UPS ratio meeting the rate at equality.

    Raises:
        EbInfeasibleError: R above the EB capacity log2(1 + P_T lambda_1^2 / sigma2)
    """
    capacity = prob.eb_capacity
    if prob.rate_req > capacity:
        raise EbInfeasibleError(prob.rate_req, capacity, context="energy beamforming")

    s = _eb_share(prob)
    mu = LN2 * (prob.sigma2 + s * prob.power_scale)
    nu = prob.g1
    return _finalize(prob, _beamforming(prob.r, prob.p_t), s, Branch.EB, mu, nu)


def _sm_loss(prob: SwiptProblem, inner: InnerSolution, s: float) -> float:
    """P_T g_1 - P_RE written as a sum of non-negative terms."""
    g = prob.gains
    received = float(np.dot(inner.powers, g))
    return s * received + float(np.dot(inner.powers, g[0] - g))


def _feasible_log_s(prob: SwiptProblem, r_max: float) -> float:
    """ln of the smallest 1 - rho at which waterfilling still reaches R."""
    g = prob.gains

    def gap(u: float) -> float:
        return waterfill_rate(g, prob.p_t, prob.sigma2 / math.exp(u)) - prob.rate_req

    u_floor = math.log(S_FLOOR)
    if gap(u_floor) >= 0.0:
        return u_floor
    if r_max - prob.rate_req <= 0.0 or gap(0.0) <= 0.0:
        return 0.0
    return brentq(gap, u_floor, 0.0, xtol=1e-14, rtol=1e-15, maxiter=500)


def solve_sm_branch(prob: SwiptProblem, r_max: Optional[float] = None) -> JointSolution:
    """
    Spatial-multiplexing optimum over rho in [0, 1 - 1e-9].

    Golden-section search runs on u = ln(1 - rho) over the interval where
    the rate is reachable and EB is not already sufficient, then the point is
    polished by root-finding dL/drho = 0.

    Raises:
        InfeasibleRateError: R above R_max
    """
    if r_max is None:
        r_max = max_rate(prob.svd, prob.p_t, prob.sigma2)
    if prob.rate_req > r_max + RATE_SLACK:
        raise InfeasibleRateError(prob.rate_req, r_max, context="spatial multiplexing")

    g = prob.gains
    scale = prob.power_scale

    if np.count_nonzero(g > 0) < 2:
        # One usable eigenchannel: multiplexing degenerates to beamforming
        return solve_eb_branch(prob)

    if prob.rate_req >= r_max:
        wf = waterfill_gains(g, prob.p_t, prob.sigma2)
        powers = wf.powers
        mu, nu = _stationary_multipliers(prob, powers, 1.0)
        logger.debug(f"R = {prob.rate_req:.6g} at R_max: full waterfilling, rho = 0")
        return _finalize(prob, powers, 1.0, Branch.SM, mu, nu)

    u_min = _feasible_log_s(prob, r_max)
    s_eb = math.expm1(prob.rate_req * LN2) * prob.sigma2 / scale
    u_max = math.log(s_eb) if 0.0 < s_eb < 1.0 else (0.0 if s_eb >= 1.0 else u_min)
    u_max = max(u_max, u_min)

    def inner_at(u: float) -> InnerSolution:
        return _solve_inner(g, math.exp(u), prob.p_t, prob.sigma2, prob.rate_req)

    def loss(u: float) -> float:
        try:
            return _sm_loss(prob, inner_at(u), math.exp(u))
        except InfeasibleRateError:
            return math.inf

    def d_rho(u: float) -> float:
        try:
            inner = inner_at(u)
        except InfeasibleRateError:
            return -1.0
        if inner.boundary:
            return -1.0
        rho = -math.expm1(u)
        derivative, _ = lagrangian_gradients(prob, inner.powers, rho, rho * inner.mu_prime,
                                             rho * inner.nu_prime, id_share=math.exp(u))
        return derivative / scale

    u_best, loss_best = golden_section_minimize(loss, u_min, u_max, tol=GOLDEN_TOLERANCE)
    endpoint_loss = loss(u_max)
    if endpoint_loss <= loss_best:
        u_best, loss_best = u_max, endpoint_loss

    if u_min < u_best < u_max:
        bracket = expand_bracket(d_rho, u_best, 1e-6, lower=u_min, upper=u_max)
        if bracket is not None:
            a, b = bracket
            u_root = a if a == b else brentq(d_rho, a, b, xtol=1e-14, rtol=1e-15, maxiter=500)
            root_loss = loss(u_root)
            if root_loss <= loss_best * (1.0 + 1e-12) + 1e-15 * scale:
                u_best, loss_best = u_root, root_loss

    inner = inner_at(u_best)
    s = math.exp(u_best)
    rho = -math.expm1(u_best)
    powers = inner.powers

    if inner.active_count <= 1 or np.count_nonzero(powers > 0) <= 1:
        logger.debug(f"SM search settled on a rank-1 allocation at R = {prob.rate_req:.6g}")
        mu, nu = _stationary_multipliers(prob, powers, s)
        return _finalize(prob, powers, s, Branch.EB, mu, nu)

    candidates = []
    if math.isfinite(inner.mu_prime) and inner.mu_prime > 0:
        candidates.append((rho * inner.mu_prime, rho * inner.nu_prime))
    candidates.append(_stationary_multipliers(prob, powers, s))

    best = None
    for mu, nu in candidates:
        sol = _finalize(prob, powers, s, Branch.SM, mu, nu)
        if best is None or sol.kkt_residual < best.kkt_residual:
            best = sol
    return best


def received_power_profile(prob: SwiptProblem, rhos: Sequence[float]) -> np.ndarray:
    """rho times the fixed-rho optimum received power; -inf where R is unreachable."""
    values = np.empty(len(rhos))
    for i, rho in enumerate(rhos):
        try:
            inner = _solve_inner(prob.gains, 1.0 - float(rho), prob.p_t, prob.sigma2,
                                 prob.rate_req)
        except InfeasibleRateError:
            values[i] = -np.inf
            continue
        values[i] = float(rho) * float(np.dot(inner.powers, prob.gains))
    return values


def rate_threshold_closed_form(svd: SvdDecomposition, p_t: float, sigma2: float,
                               p1: float, p2: float) -> float:
    """
    Switching rate between EB and two-channel SM for a given (p1, p2) split.

    With (p1, p2) = (P_T, 0) this is the exact switching point of the joint optimum.
    """
    g1, g2 = float(svd.gains[0]), float(svd.gains[1])
    d12 = g1 - g2
    root = math.sqrt(d12 * (g1 * p1 + g2 * p2) ** 2 / (g1 * g2 * sigma2 * p1))
    return math.log2(1.0 + p2 * d12 / sigma2 + root)


def eb_stationarity_threshold(svd: SvdDecomposition, p_t: float, sigma2: float) -> float:
    """
    Largest R at which dL/dp_2 <= 0 holds at the EB point.

    At the EB point dL/dp_2 = g_2 + s^2 P_T g_1 g_2 / sigma2 - g_1 with s = 1 - rho,
    which changes sign at 2^R - 1 = sqrt((g_1 - g_2) P_T g_1 / (sigma2 g_2)).
    """
    return rate_threshold_closed_form(svd, p_t, sigma2, p_t, 0.0)


def compute_rate_threshold(svd: SvdDecomposition, p_t: float, sigma2: float,
                           r_max: Optional[float] = None) -> float:
    """
    Largest R at which EB still yields at least the SM received power.

    Past the sign change of dL/dp_2 at the EB point, moving power onto the second
    eigenchannel pays, so EB cannot be optimal there. The sign change is accepted
    once the branch comparison confirms EB below it; otherwise the threshold falls
    back to bisection on the branch comparison over [0, min(R_max, EB capacity)].
    """
    gains = svd.gains
    base = SwiptProblem(svd=svd, p_t=p_t, sigma2=sigma2, rate_req=0.0)
    capacity = base.eb_capacity
    if svd.r < 2 or gains[1] <= 0:
        return capacity
    if gains[0] - gains[1] <= DEGENERATE_GAP * gains[0]:
        return 0.0
    if r_max is None:
        r_max = max_rate(svd, p_t, sigma2)
    upper = min(r_max, capacity)

    def eb_dominates(rate: float) -> bool:
        prob = base.with_rate(rate)
        eb_loss = min(prob.power_scale, math.expm1(rate * LN2) * sigma2)
        sm = solve_sm_branch(prob, r_max=r_max)
        sm_loss = prob.power_scale - sm.p_re
        return eb_loss - sm_loss <= BRANCH_MARGIN * eb_loss

    candidate = min(eb_stationarity_threshold(svd, p_t, sigma2), upper)
    checkpoints = (0.5 * candidate, max(candidate - THRESHOLD_TOLERANCE, 0.0))
    confirmed = all(eb_dominates(rate) for rate in checkpoints)
    if confirmed:
        logger.debug(f"Rate threshold {candidate:.6f} bps/Hz from the EB stationarity test")
        return candidate

    logger.debug(f"Stationarity candidate {candidate:.6f} not confirmed, bisecting")
    return bisect_last_true(eb_dominates, 0.0, upper, tol=THRESHOLD_TOLERANCE)


def solve_joint(prob: SwiptProblem, rate_threshold: Optional[float] = None,
                strict: bool = False) -> JointSolution:
    """
    Globally optimal (covariance, rho) for the rate-constrained received-power maximization.

    Dispatches on the rate threshold, evaluates the other branch as a cross-check
    and keeps whichever harvests more.

    Args:
        prob: Problem instance
        rate_threshold: Precomputed threshold; computed when omitted
        strict: Raise instead of warning when the KKT residual exceeds 1e-6

    Raises:
        InfeasibleRateError: R above R_max
        KktToleranceError: strict mode and residual above threshold
    """
    r_max = max_rate(prob.svd, prob.p_t, prob.sigma2)
    if prob.rate_req > r_max + RATE_SLACK:
        raise InfeasibleRateError(prob.rate_req, r_max)
    if rate_threshold is None:
        rate_threshold = compute_rate_threshold(prob.svd, prob.p_t, prob.sigma2, r_max=r_max)

    eb_feasible = prob.rate_req <= prob.eb_capacity

    def eb() -> JointSolution:
        return solve_eb_branch(prob)

    def sm() -> JointSolution:
        return solve_sm_branch(prob, r_max=r_max)

    if eb_feasible and prob.rate_req <= rate_threshold:
        order = [eb, sm]
    else:
        order = [sm, eb] if eb_feasible else [sm]

    candidates: List[JointSolution] = [order[0]()]
    for cross_check in order[1:]:
        try:
            candidates.append(cross_check())
        except InfeasibleRateError as e:
            logger.debug(f"Cross-check branch skipped at R = {prob.rate_req:.6g}: {e}")

    chosen = candidates[0]
    for other in candidates[1:]:
        if other.p_re > chosen.p_re * (1.0 + BRANCH_MARGIN):
            logger.debug(
                f"Branch override at R = {prob.rate_req:.6g}: {other.branch.value} "
                f"P_RE {other.p_re:.6e} beats {chosen.branch.value} {chosen.p_re:.6e}"
            )
            chosen = other

    if chosen.kkt_residual is not None and chosen.kkt_residual > KKT_ACCEPT_THRESHOLD:
        if strict:
            raise KktToleranceError(chosen.kkt_residual, KKT_ACCEPT_THRESHOLD,
                                    chosen.branch.value)
        logger.warning(
            f"KKT residual {chosen.kkt_residual:.3e} above {KKT_ACCEPT_THRESHOLD:.0e} "
            f"({chosen.branch.value}, R = {prob.rate_req:.6g})"
        )
    return chosen


def check_solution_invariants(prob: SwiptProblem, sol: JointSolution,
                              rate_tol: float = 1e-7, power_tol: float = 1e-9) -> List[str]:
    """Human-readable list of violated feasibility / tightness properties (empty when clean)."""
    problems = []
    powers = sol.allocation.powers
    total = float(np.sum(powers))
    if sol.rate_achieved < prob.rate_req - rate_tol:
        problems.append(f"rate {sol.rate_achieved:.9g} below requirement {prob.rate_req:.9g}")
    if total > prob.p_t * (1.0 + power_tol):
        problems.append(f"power {total:.12g} exceeds budget {prob.p_t:.12g}")
    if abs(total - prob.p_t) > power_tol * prob.p_t:
        problems.append(f"power budget not fully used: {total:.12g} of {prob.p_t:.12g}")
    if np.any(powers < 0):
        problems.append("negative eigenchannel power")
    if not 0.0 <= sol.rho <= 1.0:
        problems.append(f"rho {sol.rho} outside [0, 1]")
    expected = sol.rho * float(np.dot(powers, prob.gains))
    if abs(expected - sol.p_re) > 1e-12 * max(prob.power_scale, 1e-300):
        problems.append(f"P_RE {sol.p_re:.9e} inconsistent with rho * P_R {expected:.9e}")
    tight = abs(sol.rate_achieved - prob.rate_req) <= rate_tol
    if prob.rate_req > 0 and sol.id_share > 0.0 and not tight:
        problems.append(
            f"rate constraint not tight: {sol.rate_achieved:.9g} vs {prob.rate_req:.9g}"
        )
    return problems
