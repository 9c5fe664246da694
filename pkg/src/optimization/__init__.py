"""Waterfilling, the joint EB/SM solver, benchmark schemes and the grid oracle."""

from .problem import Branch, JointSolution, Scheme, SwiptProblem
from .waterfill import PowerAllocation, max_rate, waterfill, waterfill_gains, wf_rank
from .kkt import KktReport, kkt_residuals
from .joint_opt import (
    check_solution_invariants,
    compute_rate_threshold,
    eb_stationarity_threshold,
    inner_max_received_power,
    rate_threshold_closed_form,
    received_power_profile,
    solve_eb_branch,
    solve_joint,
    solve_sm_branch,
)
from .benchmarks import ops_covariance, solve_ops, solve_otcm
from .oracle import (
    GridEvaluation,
    GridSpec,
    argmax_invariance,
    evaluate_grid,
    grid_search,
    psd_spot_check,
    unimodality_scan,
)

__all__ = [
    "Branch",
    "JointSolution",
    "Scheme",
    "SwiptProblem",
    "PowerAllocation",
    "max_rate",
    "waterfill",
    "waterfill_gains",
    "wf_rank",
    "KktReport",
    "kkt_residuals",
    "check_solution_invariants",
    "compute_rate_threshold",
    "eb_stationarity_threshold",
    "inner_max_received_power",
    "rate_threshold_closed_form",
    "received_power_profile",
    "solve_eb_branch",
    "solve_joint",
    "solve_sm_branch",
    "ops_covariance",
    "solve_ops",
    "solve_otcm",
    "GridEvaluation",
    "GridSpec",
    "argmax_invariance",
    "evaluate_grid",
    "grid_search",
    "psd_spot_check",
    "unimodality_scan",
]
