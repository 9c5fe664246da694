"""Entry point for the MIMO SWIPT optimizer: solve, sweep and validate."""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

# Add src to path
sys.path.insert(0, str(Path(__file__).parent / "src"))

from src.errors import ConfigError, SwiptError


def setup_logging(level: Optional[str] = None):
    """Configure logging for the application."""
    from src.config import settings

    log_format = '%(asctime)s | %(levelname)-8s | %(name)-20s | %(message)s'
    date_format = '%Y-%m-%d %H:%M:%S'

    logging.basicConfig(
        level=getattr(logging, (level or settings.log_level).upper()),
        format=log_format,
        datefmt=date_format,
        handlers=[
            logging.StreamHandler(sys.stdout)
        ]
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Joint transmit covariance and power-splitting optimizer for MIMO SWIPT"
    )
    parser.add_argument("--log-level", default=None, help="Override SWIPT_LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser):
        p.add_argument("--config", default=None,
                       help="YAML file (looked up under the config dir if not found as given)")
        p.add_argument("--seed", type=int, default=None, help="Master RNG seed")

    solve = sub.add_parser("solve", help="Solve one channel realization")
    common(solve)
    solve.add_argument("--rate", type=float, nargs="+", default=None,
                       help="Rate requirement(s) in bps/Hz (default: half of R_max)")
    solve.add_argument("--scheme", nargs="+", default=None, choices=["joint", "ops", "otcm"])
    solve.add_argument("--realization", type=int, default=0,
                       help="Realization id whose channel to solve")
    solve.add_argument("--strict", action="store_true",
                       help="Fail when the KKT residual exceeds tolerance")

    sweep = sub.add_parser("sweep", help="Monte Carlo rate sweep")
    common(sweep)
    sweep.add_argument("--out", default=None, help="Output path without extension")
    sweep.add_argument("--scheme", nargs="+", default=None, choices=["joint", "ops", "otcm"])
    sweep.add_argument("--realizations", type=int, default=None)
    sweep.add_argument("--workers", type=int, default=None,
                       help="Worker processes (0 = one per CPU)")

    validate = sub.add_parser("validate", help="Cross-check the solver against the grid oracle")
    common(validate)
    validate.add_argument("--instances", type=int, default=None)
    return parser


def _solution_payload(prob, sol) -> Dict[str, Any]:
    from src.optimization import Scheme, kkt_residuals

    payload = sol.to_dict()
    if sol.scheme == Scheme.JOINT and sol.mu is not None:
        payload["kkt"] = kkt_residuals(prob, sol).to_dict()
    return payload


def run_solve(args, cfg) -> int:
    from src.channel import decompose, derive_seed, generate_channel
    from src.errors import InfeasibleRateError
    from src.optimization import (
        Scheme,
        SwiptProblem,
        compute_rate_threshold,
        max_rate,
        ops_covariance,
        solve_joint,
        solve_ops,
        solve_otcm,
    )

    logger = logging.getLogger(__name__)
    case = cfg.resolved_cases()[0]
    sigma2 = case.sigma2_watts
    seed = derive_seed(cfg.rng_seed, args.realization)
    svd = decompose(generate_channel(case.n_r, case.n_t, case.theta, seed))
    r_max = max_rate(svd, cfg.p_t_watts, sigma2)
    r_th = compute_rate_threshold(svd, cfg.p_t_watts, sigma2, r_max=r_max)
    logger.info(f"Case {case.label}: singular values {svd.lam}, R_max {r_max:.4f}, "
                f"R_th {r_th:.4f} bps/Hz")

    rates: List[float] = args.rate if args.rate else [0.5 * r_max]
    fixed_cov = ops_covariance(svd, cfg.p_t_watts, sigma2, cfg.benchmarks.ops_covariance)
    results = []
    for rate in rates:
        prob = SwiptProblem(svd=svd, p_t=cfg.p_t_watts, sigma2=sigma2, rate_req=rate)
        for scheme in cfg.schemes:
            entry: Dict[str, Any] = {"rate": rate, "scheme": scheme.value}
            try:
                if scheme == Scheme.JOINT:
                    sol = solve_joint(prob, rate_threshold=r_th, strict=args.strict)
                elif scheme == Scheme.OPS:
                    sol = solve_ops(prob, fixed_cov)
                else:
                    sol = solve_otcm(prob, cfg.benchmarks.otcm_rho)
            except InfeasibleRateError as e:
                entry.update({"feasible": False, "error": str(e)})
            else:
                entry.update({"feasible": True, **_solution_payload(prob, sol),
                              "p_h": float(cfg.eh_model.rectify(sol.p_re))})
            results.append(entry)

    print(json.dumps({
        "case": case.model_dump(),
        "seed": cfg.rng_seed,
        "realization": args.realization,
        "singular_values": [float(x) for x in svd.lam],
        "r_max": r_max,
        "r_th": r_th,
        "results": results,
    }, indent=2))
    return 0


def run_sweep_command(args, cfg) -> int:
    from src.simulation import emit, run_sweep

    result = run_sweep(cfg, n_workers=args.workers)
    emit(result, cfg.output_path, cfg.output_format)
    return 1 if result.violations else 0


def run_validate(args, cfg) -> int:
    from src.simulation import run_validation

    logger = logging.getLogger(__name__)
    if args.instances is not None:
        suite = cfg.validate_suite.model_copy(update={"n_instances": args.instances})
        cfg = cfg.model_copy(update={"validate_suite": suite})
    report = run_validation(cfg)
    print(json.dumps(report.to_dict(), indent=2))
    if not report.passed:
        logger.error(f"❌ Validation failed: {len(report.failures)} failure(s)")
        return 1
    logger.info("✅ All validation checks passed")
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point."""
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level)

    logger = logging.getLogger(__name__)
    logger.info("=" * 80)
    logger.info("MIMO SWIPT JOINT COVARIANCE / POWER-SPLITTING OPTIMIZER")
    logger.info("=" * 80)

    from src.config import apply_overrides, load_sim_config

    try:
        cfg = load_sim_config(args.config)
        cfg = apply_overrides(
            cfg,
            seed=args.seed,
            out=getattr(args, "out", None),
            schemes=getattr(args, "scheme", None),
            realizations=getattr(args, "realizations", None),
        )
    except ConfigError as e:
        logger.error(f"❌ {e}")
        return 2

    logger.info(f"Command: {args.command}")
    logger.info(f"  Antennas: {cfg.n_r}x{cfg.n_t}, theta {cfg.theta}, noise {cfg.sigma2_dbm} dBm, "
                f"P_T {cfg.p_t_watts} W")
    logger.info(f"  Schemes: {', '.join(s.value for s in cfg.schemes)}")
    logger.info(f"  Seed: {cfg.rng_seed}")
    logger.info("=" * 80)

    commands = {"solve": run_solve, "sweep": run_sweep_command, "validate": run_validate}
    try:
        return commands[args.command](args, cfg)
    except SwiptError as e:
        logger.error(f"❌ {e}")
        return 1
    except KeyboardInterrupt:
        logger.info("⚠️  Interrupted")
        return 130


if __name__ == "__main__":
    sys.exit(main())
