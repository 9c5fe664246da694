"""Test the brute-force oracle and its agreement with the joint solver."""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add repo root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.channel import SvdDecomposition, dbm_to_watts, decompose, generate_channel
from src.errors import DimensionMismatchError, InfeasibleRateError, OracleSizeError
from src.harvesting import EhModel
from src.optimization import (
    GridSpec,
    SwiptProblem,
    argmax_invariance,
    evaluate_grid,
    grid_search,
    max_rate,
    psd_spot_check,
    solve_joint,
    unimodality_scan,
)

P_T = 10.0


def diag_problem(rate: float) -> SwiptProblem:
    return SwiptProblem(svd=SvdDecomposition.from_diagonal([1.0, 0.5]), p_t=P_T, sigma2=1.0,
                        rate_req=rate)


def random_problem(seed: int, fraction: float) -> SwiptProblem:
    svd = decompose(generate_channel(2, 2, 0.1, seed))
    sigma2 = dbm_to_watts(-70.0)
    return SwiptProblem(svd=svd, p_t=P_T, sigma2=sigma2,
                        rate_req=fraction * max_rate(svd, P_T, sigma2))


def test_lattice_covers_simplex():
    grid = GridSpec(n_power_points=5, n_rho_points=3, simplex_dim=3)
    allocations = grid.allocations(P_T)
    assert allocations.shape == (grid.n_allocations, 3)
    assert grid.n_allocations == 15
    assert np.allclose(allocations.sum(axis=1), P_T)
    assert np.all(allocations >= 0)
    assert list(grid.rhos()) == [0.0, 0.5, 1.0]


def test_grid_spec_validation():
    with pytest.raises(ValueError):
        GridSpec(n_power_points=1, n_rho_points=10, simplex_dim=2)
    with pytest.raises(ValueError):
        GridSpec(n_power_points=10, n_rho_points=10, simplex_dim=0)


def test_grid_finds_beamforming_optimum():
    prob = diag_problem(0.9)
    grid = GridSpec.for_problem(prob, 101, 101)
    sol = grid_search(prob, grid)
    # Exact optimum rho = 1 - (2^0.9 - 1) / 10 = 0.9134; 0.92 is out of reach
    assert sol.rho == pytest.approx(0.91)
    assert list(sol.powers) == pytest.approx([10.0, 0.0])
    assert sol.p_re == pytest.approx(9.1)
    joint = solve_joint(prob)
    assert joint.p_re == pytest.approx(10.0 - (2.0 ** 0.9 - 1.0))
    assert 0.0 <= joint.p_re - sol.p_re <= grid.resolution_bound(prob)


def test_grid_agrees_with_solver_on_diagonal_channel():
    for rate in (1.0, 3.0, 3.6):
        prob = diag_problem(rate)
        grid = GridSpec.for_problem(prob, 201, 201)
        joint = solve_joint(prob)
        best = grid_search(prob, grid)
        assert best.p_re <= joint.p_re * (1.0 + 1e-9)
        assert joint.p_re - best.p_re <= grid.resolution_bound(prob)


@pytest.mark.parametrize("seed", [0, 1, 2])
@pytest.mark.parametrize("fraction", [0.2, 0.5, 0.8])
def test_grid_agrees_with_solver_on_random_channels(seed, fraction):
    prob = random_problem(seed, fraction)
    grid = GridSpec.for_problem(prob, 150, 150)
    joint = solve_joint(prob)
    best = grid_search(prob, grid)
    assert best.p_re <= joint.p_re + 1e-7 * prob.power_scale
    assert joint.p_re - best.p_re <= max(grid.resolution_bound(prob), 0.005 * joint.p_re)


def test_grid_reports_infeasible_rate():
    prob = diag_problem(3.9)
    with pytest.raises(InfeasibleRateError):
        grid_search(prob, GridSpec.for_problem(prob, 21, 21))


def test_oracle_size_limits():
    prob = SwiptProblem(svd=SvdDecomposition.from_diagonal([1.0, 0.8, 0.5, 0.2]), p_t=P_T,
                        sigma2=1.0, rate_req=1.0)
    with pytest.raises(OracleSizeError):
        grid_search(prob, GridSpec(n_power_points=10, n_rho_points=10, simplex_dim=4))
    with pytest.raises(DimensionMismatchError):
        evaluate_grid(diag_problem(1.0), GridSpec(n_power_points=10, n_rho_points=10,
                                                  simplex_dim=3))


def test_evaluate_grid_marks_infeasible_points():
    prob = diag_problem(3.0)
    evaluation = evaluate_grid(prob, GridSpec.for_problem(prob, 21, 21))
    assert evaluation.p_re.shape == (21, 21)
    # rho = 1 never carries information
    assert not np.any(evaluation.feasible[:, -1])
    assert np.any(evaluation.feasible[:, 0])


def test_argmax_invariance_for_monotone_models():
    prob = random_problem(4, 0.4)
    evaluation = evaluate_grid(prob, GridSpec.for_problem(prob, 101, 101))
    assert argmax_invariance(prob, evaluation, EhModel.linear())
    assert argmax_invariance(prob, evaluation, EhModel.saturating())


class Inverted:
    def rectify(self, p_re):
        return np.asarray(p_re).max() - np.asarray(p_re)


def test_argmax_invariance_detects_non_monotone_model():
    prob = diag_problem(1.0)
    evaluation = evaluate_grid(prob, GridSpec.for_problem(prob, 21, 21))
    assert not argmax_invariance(prob, evaluation, Inverted())


@pytest.mark.parametrize("fraction", [0.1, 0.5, 0.9])
def test_received_power_is_unimodal_in_rho(fraction):
    assert unimodality_scan(random_problem(5, fraction), 200)
    assert unimodality_scan(diag_problem(3.0), 100)


def test_unimodality_needs_enough_points():
    with pytest.raises(ValueError):
        unimodality_scan(diag_problem(1.0), 5)


def test_random_covariances_never_beat_solver():
    for seed, fraction in ((6, 0.3), (7, 0.6)):
        prob = random_problem(seed, fraction)
        joint = solve_joint(prob)
        best = psd_spot_check(prob, n_samples=300, seed=seed)
        assert best <= joint.p_re + 1e-7 * prob.power_scale
