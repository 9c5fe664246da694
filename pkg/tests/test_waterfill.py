"""Test capacity-maximizing waterfilling."""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add repo root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.channel import SvdDecomposition, decompose, generate_channel
from src.optimization import PowerAllocation, max_rate, waterfill, wf_rank
from src.optimization.waterfill import waterfill_gains, waterfill_rate


def test_two_channel_example():
    allocation = waterfill([1.0, 0.5], 10.0, 1.0)
    assert allocation.powers == pytest.approx([6.5, 3.5])
    assert allocation.water_level == pytest.approx(7.5)
    assert allocation.active_count == 2
    assert allocation.total == pytest.approx(10.0)


def test_max_rate_example():
    svd = SvdDecomposition.from_diagonal([1.0, 0.5])
    assert max_rate(svd, 10.0, 1.0) == pytest.approx(np.log2(7.5) + np.log2(1.875))
    assert max_rate(svd, 10.0, 1.0) == pytest.approx(3.8138, abs=1e-4)


def test_weak_channel_left_dry():
    # Level would sit below 1/0.01 = 100, so only the first channel is used
    allocation = waterfill([1.0, 0.1], 1.0, 1.0)
    assert wf_rank([1.0, 0.1], 1.0, 1.0) == 1
    assert allocation.powers == pytest.approx([1.0, 0.0])


def test_rank_boundary_is_strict():
    # Budget exactly fills the gap to the second channel: it stays inactive
    assert wf_rank([1.0, 0.5], 3.0, 1.0) == 1
    assert wf_rank([1.0, 0.5], 3.0 + 1e-9, 1.0) == 2


def test_zero_gain_channels_get_no_power():
    allocation = waterfill([2.0, 1.0, 0.0], 100.0, 1.0)
    assert allocation.powers[2] == 0.0
    assert allocation.active_count == 2
    assert allocation.total == pytest.approx(100.0)


def test_waterfilling_beats_other_allocations():
    svd = decompose(generate_channel(4, 4, 0.1, 8))
    sigma2 = 1e-4
    best = max_rate(svd, 10.0, sigma2)
    rng = np.random.default_rng(0)
    for _ in range(200):
        powers = rng.dirichlet(np.ones(4)) * 10.0
        rate = float(np.sum(np.log2(1 + powers * svd.gains / sigma2)))
        assert rate <= best + 1e-9


def test_waterfill_rate_matches_max_rate():
    svd = decompose(generate_channel(3, 3, 0.1, 1))
    assert waterfill_rate(svd.gains, 10.0, 1e-6) == pytest.approx(max_rate(svd, 10.0, 1e-6))


def test_high_power_tends_to_uniform():
    allocation = waterfill_gains(np.array([1.0, 0.8, 0.5]), 1e6, 1.0)
    assert allocation.powers == pytest.approx(np.full(3, 1e6 / 3), rel=1e-5)


def test_invalid_inputs():
    with pytest.raises(ValueError):
        waterfill([1.0], 0.0, 1.0)
    with pytest.raises(ValueError):
        waterfill([1.0], 1.0, -1.0)
    with pytest.raises(ValueError):
        PowerAllocation(powers=np.array([-1.0, 2.0]), active_count=1)


def test_allocation_helpers():
    eb = PowerAllocation.beamforming(3, 10.0)
    assert list(eb.powers) == [10.0, 0.0, 0.0]
    assert eb.rank == 1
    uniform = PowerAllocation.uniform(4, 10.0)
    assert uniform.powers == pytest.approx([2.5] * 4)
    with pytest.raises(ValueError):
        uniform.powers[0] = 1.0
