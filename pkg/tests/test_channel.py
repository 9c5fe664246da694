"""Test channel generation, Jacobi SVD and the link evaluators."""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add repo root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.channel import (
    ChannelRealization,
    Covariance,
    SvdDecomposition,
    achievable_rate,
    dbm_to_watts,
    decompose,
    derive_seed,
    generate_channel,
    jacobi_eigh,
    rate_from_matrix,
    received_power_from_matrix,
    received_rf_power,
)
from src.errors import DimensionMismatchError, EigensolverError


def test_generate_channel_is_deterministic():
    a = generate_channel(4, 4, 0.1, 12345)
    b = generate_channel(4, 4, 0.1, 12345)
    c = generate_channel(4, 4, 0.1, 12346)
    assert a.h.shape == (4, 4)
    assert np.array_equal(a.h, b.h)
    assert not np.array_equal(a.h, c.h)


def test_generate_channel_scales_with_theta():
    small = generate_channel(3, 2, 0.05, 7)
    large = generate_channel(3, 2, 0.1, 7)
    assert np.allclose(large.h, 2.0 * small.h, rtol=1e-12, atol=0.0)
    assert large.n_r == 3 and large.n_t == 2


def test_generate_channel_entry_statistics():
    ch = generate_channel(200, 200, 1.0, 2024)
    power = np.mean(np.abs(ch.h) ** 2)
    # E|h|^2 = theta^2 with unit theta
    assert power == pytest.approx(1.0, rel=0.02)
    assert abs(np.mean(ch.h)) < 0.02


@pytest.mark.parametrize("n_r,n_t,theta", [(0, 2, 0.1), (2, 0, 0.1), (2, 2, 0.0), (2, 2, -1.0)])
def test_generate_channel_rejects_bad_arguments(n_r, n_t, theta):
    with pytest.raises(ValueError):
        generate_channel(n_r, n_t, theta, 1)


def test_derive_seed_is_a_pure_function_of_keys():
    assert derive_seed(2024, 3) == derive_seed(2024, 3)
    seeds = {derive_seed(2024, i) for i in range(100)}
    assert len(seeds) == 100
    assert derive_seed(2024, 1, 2) != derive_seed(2024, 2, 1)
    assert derive_seed(2025, 0) != derive_seed(2024, 0)


def test_jacobi_matches_reference_eigenvalues():
    rng = np.random.default_rng(5)
    x = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    a = x @ x.conj().T
    eigvals, vecs, sweeps = jacobi_eigh(a)
    assert sweeps >= 1
    assert np.allclose(np.sort(eigvals), np.linalg.eigvalsh(a), rtol=1e-10, atol=1e-10)
    assert np.allclose(vecs.conj().T @ vecs, np.eye(5), atol=1e-12)
    assert np.allclose(a @ vecs, vecs * eigvals, atol=1e-9)


def test_jacobi_raises_when_sweep_cap_hit():
    a = np.array([[2.0, 1.0], [1.0, 3.0]], dtype=complex)
    with pytest.raises(EigensolverError) as exc:
        jacobi_eigh(a, max_sweeps=0)
    assert exc.value.sweeps == 0
    assert exc.value.residual > 0


def test_decompose_reconstructs_channel():
    ch = generate_channel(4, 3, 0.1, 99)
    svd = decompose(ch)
    assert svd.r == 3
    assert np.all(np.diff(svd.lam) <= 0)
    assert np.allclose(svd.lam, np.linalg.svd(ch.h, compute_uv=False), rtol=1e-10)
    assert np.allclose(svd.matrix, ch.h, atol=1e-12)
    assert np.allclose(svd.u.conj().T @ svd.u, np.eye(3), atol=1e-12)
    assert np.allclose(svd.v.conj().T @ svd.v, np.eye(3), atol=1e-12)


def test_decompose_wide_channel():
    ch = generate_channel(2, 4, 0.1, 3)
    svd = decompose(ch)
    assert svd.r == 2
    assert svd.v.shape == (4, 2)
    assert np.allclose(svd.matrix, ch.h, atol=1e-12)


def test_decompose_rank_deficient_channel():
    h = np.zeros((3, 3), dtype=complex)
    h[:, :2] = generate_channel(3, 2, 0.1, 21).h
    ch = ChannelRealization(h=h, theta=0.1)
    svd = decompose(ch)
    assert svd.r == 3
    assert svd.lam[1] > 0
    assert svd.lam[2] == 0.0
    assert np.allclose(svd.u.conj().T @ svd.u, np.eye(3), atol=1e-12)
    assert np.allclose(svd.matrix, ch.h, atol=1e-12)


def test_decomposition_rejects_unsorted_singular_values():
    with pytest.raises(ValueError):
        SvdDecomposition.from_diagonal([0.5, 1.0])


def test_dbm_to_watts():
    assert dbm_to_watts(30.0) == pytest.approx(1.0)
    assert dbm_to_watts(-70.0) == pytest.approx(1e-10)
    assert dbm_to_watts(0.0) == pytest.approx(1e-3)


def test_link_evaluators_on_diagonal_channel():
    svd = SvdDecomposition.from_diagonal([1.0, 0.5])
    cov = Covariance.from_powers(svd, [6.5, 3.5])
    assert received_rf_power(svd, cov) == pytest.approx(6.5 + 3.5 * 0.25)
    assert achievable_rate(svd, cov, 0.0, 1.0) == pytest.approx(np.log2(7.5 * 1.875))
    # Half the signal to ID halves every SNR
    assert achievable_rate(svd, cov, 0.5, 1.0) == pytest.approx(
        np.log2(1 + 3.25) + np.log2(1 + 3.5 * 0.25 * 0.5)
    )
    assert achievable_rate(svd, cov, 1.0, 1.0) == 0.0


def test_matrix_form_agrees_with_eigen_form():
    ch = generate_channel(3, 3, 0.1, 11)
    svd = decompose(ch)
    cov = Covariance.from_powers(svd, [5.0, 3.0, 2.0])
    s = cov.matrix()
    sigma2 = 1e-4
    for rho in (0.0, 0.3, 0.9):
        assert rate_from_matrix(ch.h, s, rho, sigma2) == pytest.approx(
            achievable_rate(svd, cov, rho, sigma2), rel=1e-10
        )
    assert received_power_from_matrix(ch.h, s) == pytest.approx(
        received_rf_power(svd, cov), rel=1e-10
    )
    assert cov.total_power == pytest.approx(10.0)


def test_shape_mismatch_raises():
    svd = SvdDecomposition.from_diagonal([1.0, 0.5])
    cov = Covariance.from_powers(SvdDecomposition.from_diagonal([1.0, 0.5, 0.2]), [1.0, 1.0, 1.0])
    with pytest.raises(DimensionMismatchError):
        received_rf_power(svd, cov)
    with pytest.raises(DimensionMismatchError):
        rate_from_matrix(np.eye(2), np.eye(3), 0.0, 1.0)


def test_achievable_rate_validates_arguments():
    svd = SvdDecomposition.from_diagonal([1.0])
    cov = Covariance.from_powers(svd, [1.0])
    with pytest.raises(ValueError):
        achievable_rate(svd, cov, 1.5, 1.0)
    with pytest.raises(ValueError):
        achievable_rate(svd, cov, 0.5, 0.0)
