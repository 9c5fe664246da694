"""Brute-force validators for the joint solver at desk scale."""

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..channel import eigen_rates, rate_from_matrix, received_power_from_matrix
from ..errors import DimensionMismatchError, InfeasibleRateError, OracleSizeError
from ..harvesting import Rectifier
from .joint_opt import received_power_profile
from .problem import Branch, JointSolution, Scheme, SwiptProblem
from .search import bisect_last_true
from .waterfill import PowerAllocation

logger = logging.getLogger(__name__)

MAX_ORACLE_RANK = 3
PLATEAU_TOLERANCE = 1e-9


@dataclass(frozen=True)
class GridSpec:
    """Barycentric power lattice on the P_T-simplex crossed with a uniform rho grid."""
    n_power_points: int
    n_rho_points: int
    simplex_dim: int

    def __post_init__(self):
        if self.n_power_points < 2 or self.n_rho_points < 2:
            raise ValueError(
                f"Grid needs at least 2 points per axis, got {self.n_power_points} power "
                f"and {self.n_rho_points} rho points"
            )
        if self.simplex_dim < 1:
            raise ValueError(f"simplex_dim must be positive, got {self.simplex_dim}")

    @classmethod
    def for_problem(cls, prob: SwiptProblem, n_power_points: int, n_rho_points: int) -> "GridSpec":
        return cls(n_power_points=n_power_points, n_rho_points=n_rho_points, simplex_dim=prob.r)

    @property
    def n_allocations(self) -> int:
        return math.comb(self.n_power_points - 1 + self.simplex_dim - 1, self.simplex_dim - 1)

    def rhos(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n_rho_points)

    def allocations(self, p_t: float) -> np.ndarray:
        """Lattice points (n_allocations x simplex_dim), lexicographic in the bar positions."""
        divisions = self.n_power_points - 1
        dim = self.simplex_dim
        rows = []
        for bars in itertools.combinations(range(divisions + dim - 1), dim - 1):
            edges = (-1,) + bars + (divisions + dim - 1,)
            rows.append([edges[i + 1] - edges[i] - 1 for i in range(dim)])
        return np.asarray(rows, dtype=float) * (p_t / divisions)

    def resolution_bound(self, prob: SwiptProblem) -> float:
        """Additive P_RE error allowed by the lattice spacing in rho and in power."""
        return 2.0 * prob.power_scale * (
            1.0 / (self.n_rho_points - 1) + 1.0 / (self.n_power_points - 1)
        )


@dataclass(frozen=True)
class GridEvaluation:
    """P_RE on every (allocation, rho) point; infeasible points hold -inf."""
    allocations: np.ndarray
    rhos: np.ndarray
    p_re: np.ndarray

    @property
    def feasible(self) -> np.ndarray:
        return np.isfinite(self.p_re)

    def argmax(self, values: Optional[np.ndarray] = None):
        """(allocation index, rho index) of the maximum; smallest index wins ties."""
        values = self.p_re if values is None else values
        flat = int(np.argmax(values))
        return np.unravel_index(flat, values.shape)


def _check_size(prob: SwiptProblem, grid: GridSpec):
    if prob.r > MAX_ORACLE_RANK:
        raise OracleSizeError(f"Grid oracle supports r <= {MAX_ORACLE_RANK}, got r = {prob.r}")
    if grid.simplex_dim != prob.r:
        raise DimensionMismatchError(
            f"Grid simplex dimension {grid.simplex_dim} does not match rank {prob.r}"
        )


def _p_re_at_rho(prob: SwiptProblem, allocations: np.ndarray, received: np.ndarray,
                 rho: float) -> np.ndarray:
    rates = eigen_rates(prob.gains, allocations, rho, prob.sigma2)
    return np.where(rates >= prob.rate_req, rho * received, -np.inf)


def evaluate_grid(prob: SwiptProblem, grid: GridSpec) -> GridEvaluation:
    """Every lattice point with its P_RE, for checks that need more than the maximum."""
    _check_size(prob, grid)
    allocations = grid.allocations(prob.p_t)
    rhos = grid.rhos()
    received = allocations @ prob.gains
    p_re = np.empty((allocations.shape[0], rhos.shape[0]))
    for j, rho in enumerate(rhos):
        p_re[:, j] = _p_re_at_rho(prob, allocations, received, float(rho))
    return GridEvaluation(allocations=allocations, rhos=rhos, p_re=p_re)


def grid_search(prob: SwiptProblem, grid: GridSpec) -> JointSolution:
    """
    Exhaustive maximization of P_RE over the lattice, one rho column at a time.

    Raises:
        OracleSizeError: rank above 3
        InfeasibleRateError: no lattice point meets the rate
    """
    _check_size(prob, grid)
    allocations = grid.allocations(prob.p_t)
    rhos = grid.rhos()
    received = allocations @ prob.gains

    best_value = -np.inf
    best_index = None
    for j, rho in enumerate(rhos):
        column = _p_re_at_rho(prob, allocations, received, float(rho))
        i = int(np.argmax(column))
        value = column[i]
        if value > best_value or (value == best_value and best_index is not None
                                  and (i, j) < best_index):
            best_value = value
            best_index = (i, j)

    if best_index is None or not np.isfinite(best_value):
        best_rate = float(np.max(eigen_rates(prob.gains, allocations, 0.0, prob.sigma2)))
        raise InfeasibleRateError(prob.rate_req, best_rate, context="grid oracle")

    i, j = best_index
    powers = allocations[i]
    rho = float(rhos[j])
    active = int(np.count_nonzero(powers > 0))
    logger.debug(f"Grid oracle optimum P_RE {best_value:.6e} at rho {rho:.4f}, powers {powers}")
    return JointSolution(
        allocation=PowerAllocation(powers=powers, active_count=active),
        rho=rho,
        branch=Branch.EB if active <= 1 else Branch.SM,
        rate_achieved=float(eigen_rates(prob.gains, powers, rho, prob.sigma2)),
        p_re=float(best_value),
        scheme=Scheme.JOINT,
    )


def _random_psd(rng: np.random.Generator, n_t: int, p_t: float) -> np.ndarray:
    a = rng.standard_normal((n_t, n_t)) + 1j * rng.standard_normal((n_t, n_t))
    # Random rank so that low-rank covariances are sampled too
    rank = int(rng.integers(1, n_t + 1))
    a = a[:, :rank]
    s = a @ a.conj().T
    return s * (p_t / float(np.real(np.trace(s))))


def psd_spot_check(prob: SwiptProblem, n_samples: int = 1000, seed: int = 0) -> float:
    """
    Best P_RE reached by random full PSD covariances of trace P_T, each with its
    largest feasible rho. Returns -inf when no sample meets the rate.
    """
    h = prob.svd.matrix
    n_t = h.shape[1]
    rng = np.random.default_rng(seed)
    best = -np.inf
    for _ in range(n_samples):
        s = _random_psd(rng, n_t, prob.p_t)
        if rate_from_matrix(h, s, 0.0, prob.sigma2) < prob.rate_req:
            continue
        rho = bisect_last_true(
            lambda x: rate_from_matrix(h, s, x, prob.sigma2) >= prob.rate_req,
            0.0, 1.0, tol=1e-10,
        )
        best = max(best, rho * received_power_from_matrix(h, s))
    return best


def _merge_plateaus(values: np.ndarray, tol: float) -> np.ndarray:
    merged = []
    for v in values:
        if merged:
            last = merged[-1]
            same = (np.isneginf(v) and np.isneginf(last)) or abs(v - last) <= tol
            if same:
                continue
        merged.append(v)
    return np.asarray(merged)


def unimodality_scan(prob: SwiptProblem, n_rho: int) -> bool:
    """
    True iff rho -> rho * (fixed-rho optimal received power) sampled on
    ``n_rho`` points has exactly one local maximum; infeasible points count as -inf.
    """
    if n_rho < 10:
        raise ValueError(f"n_rho must be at least 10, got {n_rho}")
    rhos = np.linspace(0.0, 1.0, n_rho)
    values = received_power_profile(prob, rhos)
    if not np.any(np.isfinite(values)):
        logger.warning(f"No feasible rho for R = {prob.rate_req:.6g}")
        return False

    seq = _merge_plateaus(values, PLATEAU_TOLERANCE * prob.power_scale)
    peaks = 0
    for i, v in enumerate(seq):
        left = seq[i - 1] if i > 0 else -np.inf
        right = seq[i + 1] if i + 1 < len(seq) else -np.inf
        if np.isfinite(v) and v > left and v > right:
            peaks += 1
    return peaks == 1


def argmax_invariance(prob: SwiptProblem, evaluation: GridEvaluation, model: Rectifier) -> bool:
    """True iff the lattice point maximizing P_RE also maximizes the harvested DC power."""
    feasible = evaluation.feasible
    harvested = np.full(evaluation.p_re.shape, -np.inf)
    harvested[feasible] = np.asarray(model.rectify(evaluation.p_re[feasible]), dtype=float)
    i, j = evaluation.argmax()
    return bool(harvested[i, j] >= np.max(harvested))
