"""Oracle suite: cross-check the joint solver against brute force on random 2x2 channels."""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from ..channel import decompose, derive_seed, generate_channel
from ..config import SimConfig
from ..harvesting import EhModel
from ..optimization import (
    GridSpec,
    SwiptProblem,
    argmax_invariance,
    check_solution_invariants,
    compute_rate_threshold,
    evaluate_grid,
    max_rate,
    psd_spot_check,
    solve_joint,
    unimodality_scan,
)
from ..optimization.kkt import KKT_ACCEPT_THRESHOLD

logger = logging.getLogger(__name__)

VALIDATION_STREAM = 1 << 21
GRID_RELATIVE_TOLERANCE = 0.005
# Lattice points are feasible, so the grid may only exceed the solver by roundoff
OVERSHOOT_TOLERANCE = 1e-7

CHECKS = ("grid_agreement", "unimodality", "kkt", "argmax_invariance", "psd_spot_check")


@dataclass
class ValidationReport:
    """Pass/fail counts per check plus one line per failure."""
    counts: Dict[str, List[int]] = field(
        default_factory=lambda: {name: [0, 0] for name in CHECKS}
    )
    failures: List[str] = field(default_factory=list)

    def record(self, check: str, ok: bool, detail: str = ""):
        self.counts[check][0 if ok else 1] += 1
        if not ok:
            self.failures.append(f"[{check}] {detail}")
            logger.warning(f"Validation failure [{check}] {detail}")

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> Dict:
        return {
            "passed": self.passed,
            "checks": {k: {"passed": v[0], "failed": v[1]} for k, v in self.counts.items()},
            "failures": list(self.failures),
        }


def _check_instance(prob: SwiptProblem, label: str, grid: GridSpec, n_unimodality: int,
                    models: List[EhModel], r_th: float, report: ValidationReport,
                    psd_samples: Optional[int], psd_seed: int):
    sol = solve_joint(prob, rate_threshold=r_th)

    problems = check_solution_invariants(prob, sol)
    residual = sol.kkt_residual if sol.kkt_residual is not None else np.inf
    report.record(
        "kkt",
        residual <= KKT_ACCEPT_THRESHOLD and not problems,
        f"{label}: residual {residual:.3e}; {'; '.join(problems) or 'invariants ok'}",
    )

    report.record("unimodality", unimodality_scan(prob, n_unimodality),
                  f"{label}: more than one local maximum over rho")

    evaluation = evaluate_grid(prob, grid)
    if not np.any(evaluation.feasible):
        report.record("grid_agreement", False, f"{label}: no feasible lattice point")
        return
    i, j = evaluation.argmax()
    grid_best = float(evaluation.p_re[i, j])
    scale = prob.power_scale
    allowed = max(grid.resolution_bound(prob), GRID_RELATIVE_TOLERANCE * sol.p_re)
    overshoot = grid_best - sol.p_re
    gap = sol.p_re - grid_best
    report.record(
        "grid_agreement",
        overshoot <= OVERSHOOT_TOLERANCE * scale and gap <= allowed,
        f"{label}: solver {sol.p_re:.9e} vs grid {grid_best:.9e} (allowed gap {allowed:.3e})",
    )

    for model in models:
        report.record("argmax_invariance", argmax_invariance(prob, evaluation, model),
                      f"{label}: {model.describe()} argmax differs from P_RE argmax")

    if psd_samples:
        best = psd_spot_check(prob, n_samples=psd_samples, seed=psd_seed)
        report.record(
            "psd_spot_check",
            best <= sol.p_re + OVERSHOOT_TOLERANCE * scale,
            f"{label}: random covariance reached {best:.9e} above solver {sol.p_re:.9e}",
        )


def run_validation(cfg: SimConfig, seed: Optional[int] = None) -> ValidationReport:
    """
    Random 2x2 instances at the configured theta / noise, each checked at several
    rate levels spread inside (0, R_max).
    """
    suite = cfg.validate_suite
    seed = cfg.rng_seed if seed is None else seed
    sigma2 = cfg.sigma2_watts
    models = [cfg.eh_model, EhModel.linear(), EhModel.saturating()]
    report = ValidationReport()

    logger.info(
        f"Validation: {suite.n_instances} instance(s) x {suite.rate_levels} rate level(s), "
        f"grid {suite.n_power_points}x{suite.n_rho_points}, seed {seed}"
    )
    for k in range(suite.n_instances):
        instance_seed = derive_seed(seed, VALIDATION_STREAM, k)
        svd = decompose(generate_channel(2, 2, cfg.theta, instance_seed))
        r_max = max_rate(svd, cfg.p_t_watts, sigma2)
        r_th = compute_rate_threshold(svd, cfg.p_t_watts, sigma2, r_max=r_max)
        middle = (suite.rate_levels + 1) // 2
        for level in range(1, suite.rate_levels + 1):
            rate = level * r_max / (suite.rate_levels + 1)
            prob = SwiptProblem(svd=svd, p_t=cfg.p_t_watts, sigma2=sigma2, rate_req=rate)
            grid = GridSpec.for_problem(prob, suite.n_power_points, suite.n_rho_points)
            _check_instance(
                prob, f"instance {k} R={rate:.4f}", grid, suite.n_unimodality, models, r_th,
                report, psd_samples=suite.psd_samples if level == middle else None,
                psd_seed=instance_seed,
            )
        if (k + 1) % max(1, suite.n_instances // 10) == 0:
            logger.info(f"Progress: {k + 1}/{suite.n_instances} instances")

    for name, (ok, bad) in report.counts.items():
        logger.info(f"{name:<20} passed {ok:>5}  failed {bad:>5}")
    return report
