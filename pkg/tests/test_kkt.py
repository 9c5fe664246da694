"""Test KKT residual reporting."""

import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

# Add repo root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.channel import SvdDecomposition
from src.optimization import SwiptProblem, kkt_residuals, solve_joint, solve_otcm
from src.optimization.kkt import KktReport, lagrangian_gradients


def problem(rate: float) -> SwiptProblem:
    return SwiptProblem(svd=SvdDecomposition.from_diagonal([1.0, 0.5]), p_t=10.0, sigma2=1.0,
                        rate_req=rate)


def test_gradients_vanish_at_energy_beamforming_optimum():
    prob = problem(1.0)
    d_rho, d_powers = lagrangian_gradients(prob, np.array([10.0, 0.0]), 0.9,
                                           mu=2.0 * math.log(2.0), nu=1.0)
    assert d_rho == pytest.approx(0.0, abs=1e-12)
    assert d_powers[0] == pytest.approx(0.0, abs=1e-12)
    # Inactive channel would lose received power
    assert d_powers[1] < 0


def test_report_on_joint_solutions():
    for rate in (1.0, 3.0, 3.6):
        prob = problem(rate)
        report = kkt_residuals(prob, solve_joint(prob))
        assert report.passes()
        assert report.mu_nonnegative and report.nu_nonnegative
        assert report.inactive_gradient <= 1e-6


def test_wrong_multipliers_are_detected():
    prob = problem(1.0)
    sol = solve_joint(prob)
    report = kkt_residuals(prob, replace(sol, mu=0.1, nu=5.0))
    assert not report.passes()
    assert report.d_powers > 1.0


def test_benchmark_solutions_carry_no_multipliers():
    prob = problem(1.0)
    sol = solve_otcm(prob, 0.5)
    with pytest.raises(ValueError):
        kkt_residuals(prob, sol)


def test_report_residual_and_dict():
    report = KktReport(d_rho=1e-9, d_powers=3e-7, inactive_gradient=0.5, rate_slackness=0.0,
                       power_slackness=2e-8, mu_nonnegative=True, nu_nonnegative=True)
    # Inactive gradient is informational only
    assert report.residual == pytest.approx(3e-7)
    assert report.passes()
    assert not report.passes(threshold=1e-7)
    data = report.to_dict()
    assert data["residual"] == pytest.approx(3e-7)
    assert set(data) >= {"d_rho", "d_powers", "rate_slackness", "power_slackness"}


def test_boundary_rho_only_counts_inward_gradient():
    prob = problem(0.0)
    sol = solve_joint(prob)
    assert sol.rho == 1.0
    report = kkt_residuals(prob, sol)
    assert report.d_rho == pytest.approx(0.0, abs=1e-12)
