"""Monte Carlo rate sweep over channel realizations for every configured scheme."""

import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from ..channel import Covariance, decompose, derive_seed, generate_channel
from ..config import CaseSpec, SimConfig
from ..errors import InfeasibleRateError
from ..optimization import (
    JointSolution,
    Scheme,
    SwiptProblem,
    check_solution_invariants,
    compute_rate_threshold,
    max_rate,
    ops_covariance,
    solve_joint,
    solve_ops,
    solve_otcm,
)

logger = logging.getLogger(__name__)

SCHEME_ORDER = {scheme.value: i for i, scheme in enumerate(Scheme)}

# Key offset separating spot-check draws from channel seeds
SPOT_CHECK_STREAM = 1 << 20

RECORD_HEAD = [
    "case", "realization", "rate_index", "rate_fraction", "rate", "scheme", "feasible",
    "branch", "rho", "id_share", "p_re", "p_h", "rate_achieved", "kkt_residual", "r_max", "r_th",
    "theta", "sigma2_dbm", "n_r", "n_t",
]
RECORD_TAIL = ["error"]


def power_columns(max_rank: int) -> List[str]:
    return [f"p_{i + 1}" for i in range(max_rank)]


def record_columns(max_rank: int) -> List[str]:
    """Fixed CSV column order."""
    return RECORD_HEAD + power_columns(max_rank) + RECORD_TAIL


@dataclass
class RealizationTask:
    cfg: SimConfig
    case: CaseSpec
    case_index: int
    realization: int


@dataclass
class RealizationOutcome:
    case_index: int
    realization: int
    records: List[Dict[str, Any]]
    r_max: float
    r_th: float
    spot_checked: int = 0
    violations: List[str] = field(default_factory=list)


@dataclass
class SweepResult:
    """Per-record table plus aggregates for tradeoff curves and benchmark gains."""
    records: pd.DataFrame
    aggregates: pd.DataFrame
    gains: pd.DataFrame
    case_summary: pd.DataFrame
    config: Dict[str, Any]
    spot_checked: int = 0
    violations: List[str] = field(default_factory=list)

    @property
    def n_infeasible(self) -> int:
        if self.records.empty:
            return 0
        return int((~self.records["feasible"].astype(bool)).sum())


def _rate_grid(cfg: SimConfig, r_max: float):
    """(rate, fraction-or-None) pairs for one realization."""
    if cfg.rate_grid.mode == "auto":
        return [(f * r_max, f) for f in cfg.rate_grid.fractions()]
    return [(float(v), None) for v in cfg.rate_grid.values]


def _spot_selected(cfg: SimConfig, realization: int, rate_index: int) -> bool:
    if cfg.spot_check_fraction <= 0:
        return False
    draw = derive_seed(cfg.rng_seed, SPOT_CHECK_STREAM, realization, rate_index)
    return draw / 2.0 ** 64 < cfg.spot_check_fraction


def _solve_scheme(scheme: Scheme, prob: SwiptProblem, r_th: float, fixed_cov: Covariance,
                  otcm_rho: float) -> JointSolution:
    if scheme == Scheme.JOINT:
        return solve_joint(prob, rate_threshold=r_th)
    if scheme == Scheme.OPS:
        return solve_ops(prob, fixed_cov)
    return solve_otcm(prob, otcm_rho)


def _base_record(task: RealizationTask, rate_index: int, fraction: Optional[float], rate: float,
                 scheme: Scheme, r_max: float, r_th: float, max_rank: int) -> Dict[str, Any]:
    record = {
        "case": task.case.label,
        "realization": task.realization,
        "rate_index": rate_index,
        "rate_fraction": fraction if fraction is not None else math.nan,
        "rate": rate,
        "scheme": scheme.value,
        "feasible": False,
        "branch": "",
        "rho": math.nan,
        "id_share": math.nan,
        "p_re": math.nan,
        "p_h": math.nan,
        "rate_achieved": math.nan,
        "kkt_residual": math.nan,
        "r_max": r_max,
        "r_th": r_th,
        "theta": task.case.theta,
        "sigma2_dbm": task.case.sigma2_dbm,
        "n_r": task.case.n_r,
        "n_t": task.case.n_t,
        "error": "",
    }
    for col in power_columns(max_rank):
        record[col] = math.nan
    return record


def run_realization(task: RealizationTask) -> RealizationOutcome:
    """Solve every (rate, scheme) pair on one channel realization."""
    cfg = task.cfg
    case = task.case
    sigma2 = case.sigma2_watts
    p_t = cfg.p_t_watts
    max_rank = max(min(c.n_r, c.n_t) for c in cfg.resolved_cases())

    seed = derive_seed(cfg.rng_seed, task.realization)
    svd = decompose(generate_channel(case.n_r, case.n_t, case.theta, seed))
    r_max = max_rate(svd, p_t, sigma2)
    r_th = compute_rate_threshold(svd, p_t, sigma2, r_max=r_max)
    fixed_cov = ops_covariance(svd, p_t, sigma2, cfg.benchmarks.ops_covariance)

    outcome = RealizationOutcome(case_index=task.case_index, realization=task.realization,
                                 records=[], r_max=r_max, r_th=r_th)
    for rate_index, (rate, fraction) in enumerate(_rate_grid(cfg, r_max)):
        prob = SwiptProblem(svd=svd, p_t=p_t, sigma2=sigma2, rate_req=rate)
        for scheme in cfg.schemes:
            record = _base_record(task, rate_index, fraction, rate, scheme, r_max, r_th, max_rank)
            try:
                sol = _solve_scheme(scheme, prob, r_th, fixed_cov, cfg.benchmarks.otcm_rho)
            except InfeasibleRateError as e:
                record["error"] = str(e)
                outcome.records.append(record)
                continue

            record.update({
                "feasible": True,
                "branch": sol.branch.value,
                "rho": sol.rho,
                "id_share": sol.id_share,
                "p_re": sol.p_re,
                "p_h": float(cfg.eh_model.rectify(sol.p_re)),
                "rate_achieved": sol.rate_achieved,
                "kkt_residual": sol.kkt_residual if sol.kkt_residual is not None else math.nan,
            })
            for i, p in enumerate(sol.powers):
                record[f"p_{i + 1}"] = float(p)
            outcome.records.append(record)

            if scheme == Scheme.JOINT and _spot_selected(cfg, task.realization, rate_index):
                outcome.spot_checked += 1
                for problem in check_solution_invariants(prob, sol):
                    message = (f"{case.label} realization {task.realization} "
                               f"R={rate:.6g}: {problem}")
                    logger.warning(f"Spot check failed: {message}")
                    outcome.violations.append(message)
    return outcome


def _resolve_workers(n_workers: Optional[int]) -> int:
    if n_workers is None:
        from ..config import settings
        n_workers = settings.n_workers
    if n_workers == 0:
        n_workers = os.cpu_count() or 1
    return max(1, n_workers)


def aggregate_records(records: pd.DataFrame, max_rank: int) -> pd.DataFrame:
    """Mean / population std per (case, rate_index, scheme) over feasible records."""
    pcols = power_columns(max_rank)
    columns = (["case", "rate_index", "scheme", "mean_rate", "mean_rate_fraction", "mean_p_re",
                "std_p_re", "mean_p_h", "std_p_h", "mean_rho"]
               + [f"mean_{c}" for c in pcols] + ["n_feasible", "n_infeasible"])
    if records.empty:
        return pd.DataFrame(columns=columns)

    keys = ["case", "rate_index", "scheme"]
    grouped = records.groupby(keys, sort=False)
    counts = grouped.agg(
        mean_rate=("rate", "mean"),
        mean_rate_fraction=("rate_fraction", "mean"),
        n_total=("feasible", "size"),
        n_feasible=("feasible", "sum"),
    )
    counts["n_feasible"] = counts["n_feasible"].astype(int)
    counts["n_infeasible"] = counts["n_total"] - counts["n_feasible"]

    feasible = records[records["feasible"].astype(bool)]
    named = {
        "mean_p_re": ("p_re", "mean"),
        "std_p_re": ("p_re", lambda s: float(s.std(ddof=0))),
        "mean_p_h": ("p_h", "mean"),
        "std_p_h": ("p_h", lambda s: float(s.std(ddof=0))),
        "mean_rho": ("rho", "mean"),
    }
    for c in pcols:
        named[f"mean_{c}"] = (c, "mean")
    table = counts.reset_index()
    if feasible.empty:
        for name in named:
            table[name] = np.nan
    else:
        stats = feasible.groupby(keys, sort=False).agg(**named).reset_index()
        table = table.merge(stats, on=keys, how="left")
    return table[columns]


def benchmark_gains(records: pd.DataFrame) -> pd.DataFrame:
    """Joint-over-benchmark mean P_RE gain in percent over realizations feasible for both."""
    columns = ["case", "rate_index", "benchmark", "mean_rate", "mean_p_re_joint",
               "mean_p_re_benchmark", "gain_pct", "n_paired"]
    if records.empty:
        return pd.DataFrame(columns=columns)

    keys = ["case", "realization", "rate_index"]
    feasible = records[records["feasible"].astype(bool)]
    joint = feasible[feasible["scheme"] == Scheme.JOINT.value][keys + ["rate", "p_re"]]
    frames = []
    for bench in (Scheme.OPS.value, Scheme.OTCM.value):
        other = feasible[feasible["scheme"] == bench][keys + ["p_re"]]
        if joint.empty or other.empty:
            continue
        paired = joint.merge(other, on=keys, suffixes=("_joint", "_benchmark"))
        if paired.empty:
            continue
        table = paired.groupby(["case", "rate_index"], sort=False).agg(
            mean_rate=("rate", "mean"),
            mean_p_re_joint=("p_re_joint", "mean"),
            mean_p_re_benchmark=("p_re_benchmark", "mean"),
            n_paired=("p_re_joint", "size"),
        ).reset_index()
        bench_mean = table["mean_p_re_benchmark"]
        table["gain_pct"] = np.where(
            bench_mean > 0,
            100.0 * (table["mean_p_re_joint"] - bench_mean) / bench_mean.where(bench_mean > 0, 1.0),
            np.nan,
        )
        table["benchmark"] = bench
        frames.append(table[columns])

    if not frames:
        return pd.DataFrame(columns=columns)
    return pd.concat(frames, ignore_index=True)


def summarize_cases(outcomes: List[RealizationOutcome], labels: List[str]) -> pd.DataFrame:
    columns = ["case", "n_realizations", "mean_r_max", "std_r_max", "mean_r_th", "std_r_th"]
    rows = []
    for index, label in enumerate(labels):
        mine = [o for o in outcomes if o.case_index == index]
        if not mine:
            continue
        r_max = np.array([o.r_max for o in mine])
        r_th = np.array([o.r_th for o in mine])
        rows.append({
            "case": label,
            "n_realizations": len(mine),
            "mean_r_max": float(np.mean(r_max)),
            "std_r_max": float(np.std(r_max)),
            "mean_r_th": float(np.mean(r_th)),
            "std_r_th": float(np.std(r_th)),
        })
    return pd.DataFrame(rows, columns=columns)


def run_sweep(cfg: SimConfig, n_workers: Optional[int] = None) -> SweepResult:
    """
    Run every case of ``cfg`` over ``n_realizations`` channel draws.

    Per-realization seeds come from the master seed and the realization id, so
    serial and parallel runs emit identical records in canonical order
    (case, realization, rate index, scheme).
    """
    cases = cfg.resolved_cases()
    max_rank = max(min(c.n_r, c.n_t) for c in cases)
    workers = _resolve_workers(n_workers)

    logger.info(
        f"Sweep: {len(cases)} case(s) x {cfg.n_realizations} realizations, schemes "
        f"{[s.value for s in cfg.schemes]}, seed {cfg.rng_seed}, {workers} worker(s)"
    )
    logger.info(
        f"Benchmarks: OPS covariance '{cfg.benchmarks.ops_covariance}', "
        f"OTCM rho {cfg.benchmarks.otcm_rho}; EH model {cfg.eh_model.describe()}"
    )

    tasks = [
        RealizationTask(cfg=cfg, case=case, case_index=ci, realization=i)
        for ci, case in enumerate(cases)
        for i in range(cfg.n_realizations)
    ]

    outcomes: List[RealizationOutcome] = []
    progress_step = max(1, len(tasks) // 10)
    if workers == 1:
        results = map(run_realization, tasks)
        executor = None
    else:
        executor = ProcessPoolExecutor(max_workers=workers)
        chunksize = max(1, len(tasks) // (workers * 8))
        results = executor.map(run_realization, tasks, chunksize=chunksize)
    try:
        for done, outcome in enumerate(results, start=1):
            outcomes.append(outcome)
            if done % progress_step == 0 or done == len(tasks):
                logger.info(f"Progress: {done}/{len(tasks)} realizations")
    finally:
        if executor is not None:
            executor.shutdown()

    outcomes.sort(key=lambda o: (o.case_index, o.realization))
    rows = [
        (o.case_index, record)
        for o in outcomes
        for record in o.records
    ]
    rows.sort(key=lambda item: (item[0], item[1]["realization"], item[1]["rate_index"],
                                SCHEME_ORDER[item[1]["scheme"]]))
    records = pd.DataFrame([record for _, record in rows], columns=record_columns(max_rank))
    records["feasible"] = records["feasible"].astype(bool)

    labels = [c.label for c in cases]
    case_summary = summarize_cases(outcomes, labels)
    for row in case_summary.itertuples():
        logger.info(
            f"Case {row.case}: mean R_max {row.mean_r_max:.2f} bps/Hz, "
            f"mean R_th {row.mean_r_th:.2f} bps/Hz over {row.n_realizations} realizations"
        )

    violations = [v for o in outcomes for v in o.violations]
    spot_checked = sum(o.spot_checked for o in outcomes)
    if violations:
        logger.warning(f"{len(violations)} invariant violation(s) in {spot_checked} spot checks")
    else:
        logger.info(f"Spot checks passed: {spot_checked} joint solution(s)")

    result = SweepResult(
        records=records,
        aggregates=aggregate_records(records, max_rank),
        gains=benchmark_gains(records),
        case_summary=case_summary,
        config=cfg.echo(),
        spot_checked=spot_checked,
        violations=violations,
    )
    if result.n_infeasible:
        logger.info(f"{result.n_infeasible} infeasible (rate, scheme) record(s) kept in output")
    return result
