#!/usr/bin/env python3
"""Check that an experiment config file loads and looks sensible."""

import argparse
import sys
from pathlib import Path

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.config import SimConfig, load_sim_config, settings
from src.errors import ConfigError


def check_settings():
    """Environment settings."""
    print("🔍 Environment settings...")
    print(f"  ✓ log level: {settings.log_level}")
    print(f"  ✓ config dir: {settings.config_dir}")
    workers = settings.n_workers or "one per CPU"
    print(f"  ✓ workers: {workers}")
    return []


def check_experiment(cfg: SimConfig):
    print("\n🔍 Experiment...")
    issues = []

    for case in cfg.resolved_cases():
        print(f"  ✓ case {case.label}: {case.n_r}x{case.n_t}, theta {case.theta}, "
              f"noise {case.sigma2_dbm} dBm ({case.sigma2_watts:.3e} W)")
        if case.sigma2_dbm > 0:
            issues.append(f"case {case.label}: noise {case.sigma2_dbm} dBm looks too high")
    print(f"  ✓ P_T: {cfg.p_t_watts} W")
    print(f"  ✓ schemes: {', '.join(s.value for s in cfg.schemes)}")
    print(f"  ✓ realizations: {cfg.n_realizations}, seed {cfg.rng_seed}")

    grid = cfg.rate_grid
    if grid.mode == "auto":
        print(f"  ✓ rate grid: {grid.points} fractions of R_max up to {grid.max_fraction}")
        if grid.max_fraction >= 1.0:
            issues.append("rate_grid.max_fraction = 1 solves exactly at R_max, which is delicate")
    else:
        print(f"  ✓ rate grid: {len(grid.values)} fixed value(s) {grid.values}")
    return issues


def check_models(cfg: SimConfig):
    print("\n🔍 Models...")
    issues = []
    print(f"  ✓ EH model: {cfg.eh_model.describe()}")
    print(f"  ✓ OPS covariance: {cfg.benchmarks.ops_covariance}")
    print(f"  ✓ OTCM rho: {cfg.benchmarks.otcm_rho}")

    suite = cfg.validate_suite
    largest = max(min(c.n_r, c.n_t) for c in cfg.resolved_cases())
    print(f"  ✓ validate grid: {suite.n_power_points}x{suite.n_rho_points} on 2x2 channels")
    if largest > 3:
        print(f"  ℹ️  rank {largest} is beyond the grid oracle; validate uses 2x2 instances")
    return issues


def main():
    parser = argparse.ArgumentParser(description="Validate an experiment config")
    parser.add_argument("config", nargs="?", default=None)
    args = parser.parse_args()

    print("=" * 60)
    print("Config check")
    print("=" * 60)

    try:
        cfg = load_sim_config(args.config)
    except ConfigError as e:
        print(f"❌ {e}")
        sys.exit(2)

    all_issues = []
    all_issues.extend(check_settings())
    all_issues.extend(check_experiment(cfg))
    all_issues.extend(check_models(cfg))

    print("\n" + "=" * 60)

    if all_issues:
        print("❌ Issues found:\n")
        for i, issue in enumerate(all_issues, 1):
            print(f"{i}. {issue}")
        sys.exit(1)
    else:
        print("✅ Config OK")
        print("\nRun with:")
        print(f"  python main.py sweep --config {args.config or 'sweep_config.yaml'}")
        sys.exit(0)


if __name__ == "__main__":
    main()
