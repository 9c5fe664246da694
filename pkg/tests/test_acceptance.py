"""
Monte Carlo acceptance runs on the 4x4 and 2x2 setups.

Slow: deselected by default, run with `pytest -m slow`.
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add repo root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.channel import decompose, derive_seed, dbm_to_watts, generate_channel
from src.config import SimConfig
from src.optimization import (
    Branch,
    SwiptProblem,
    compute_rate_threshold,
    max_rate,
    rate_threshold_closed_form,
    solve_joint,
)
from src.simulation import run_sweep

pytestmark = pytest.mark.slow

P_T = 10.0
SIGMA2 = dbm_to_watts(-70.0)


def realizations(n: int, n_r: int = 4, n_t: int = 4, theta: float = 0.1, seed: int = 2024):
    for k in range(n):
        yield decompose(generate_channel(n_r, n_t, theta, derive_seed(seed, k)))


@pytest.mark.parametrize("theta,sigma2_dbm,expected", [
    (0.05, -70.0, 106.60),
    (0.1, -70.0, 114.42),
    (0.05, -100.0, 146.47),
    (0.1, -100.0, 154.28),
])
def test_mean_max_rate_4x4(theta, sigma2_dbm, expected):
    sigma2 = dbm_to_watts(sigma2_dbm)
    rates = [max_rate(svd, P_T, sigma2) for svd in realizations(1000, theta=theta)]
    assert np.mean(rates) == pytest.approx(expected, rel=0.05)


def test_rate_threshold_matches_closed_form():
    for svd in realizations(20):
        r_max = max_rate(svd, P_T, SIGMA2)
        numeric = compute_rate_threshold(svd, P_T, SIGMA2, r_max=r_max)
        closed = rate_threshold_closed_form(svd, P_T, SIGMA2, P_T, 0.0)
        assert numeric == pytest.approx(min(closed, r_max), rel=1e-3)


def test_high_rate_joint_allocation_is_near_uniform():
    for svd in realizations(5):
        r_max = max_rate(svd, P_T, SIGMA2)
        prob = SwiptProblem(svd=svd, p_t=P_T, sigma2=SIGMA2, rate_req=0.998 * r_max)
        sol = solve_joint(prob)
        assert sol.branch == Branch.SM
        assert np.max(np.abs(sol.powers - P_T / 4)) <= 0.1 * P_T


def test_low_rate_joint_allocation_is_beamforming():
    for svd in realizations(5):
        r_max = max_rate(svd, P_T, SIGMA2)
        r_th = compute_rate_threshold(svd, P_T, SIGMA2, r_max=r_max)
        for fraction in (0.25, 0.5, 0.9):
            prob = SwiptProblem(svd=svd, p_t=P_T, sigma2=SIGMA2, rate_req=fraction * r_th)
            sol = solve_joint(prob, rate_threshold=r_th)
            assert sol.branch == Branch.EB
            assert sol.allocation.rank == 1
            assert sol.powers[0] == P_T


def _mean_p_re(aggregates, scheme, max_fraction):
    rows = aggregates[(aggregates["scheme"] == scheme)
                      & (aggregates["mean_rate_fraction"] <= max_fraction + 1e-12)]
    return rows["mean_p_re"].to_numpy()


def test_scheme_ordering():
    cfg = SimConfig.model_validate({
        "n_realizations": 1000,
        "rng_seed": 7,
        "rate_grid": {"mode": "auto", "points": 3, "max_fraction": 0.5},
        "cases": [{"label": "n2", "n_r": 2, "n_t": 2}, {"label": "n4", "n_r": 4, "n_t": 4}],
    })
    result = run_sweep(cfg, n_workers=0)
    assert result.violations == []

    records = result.records
    for case in ("n2", "n4"):
        rows = records[records["case"] == case].set_index(["realization", "rate_index"])
        joint = rows[rows["scheme"] == "joint"]["p_re"]
        for benchmark in ("ops", "otcm"):
            other = rows[rows["scheme"] == benchmark]["p_re"]
            assert (joint - other).dropna().min() >= -1e-9 * joint.max()

    aggregates = result.aggregates
    n2 = aggregates[aggregates["case"] == "n2"]
    assert np.all(_mean_p_re(n2, "ops", 0.25) > _mean_p_re(n2, "otcm", 0.25))
    n4 = aggregates[aggregates["case"] == "n4"]
    assert np.all(_mean_p_re(n4, "otcm", 0.25) > _mean_p_re(n4, "ops", 0.25))

    for case in ("n2", "n4"):
        mid = result.gains[(result.gains["case"] == case) & (result.gains["rate_index"] == 2)]
        assert len(mid) == 2
        assert (mid["gain_pct"] > 20.0).all()
