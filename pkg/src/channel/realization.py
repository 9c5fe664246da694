"""Random flat-fading MIMO channel generation."""

import logging
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class ChannelRealization:
    """One N_R x N_T channel matrix scaled by the propagation-loss factor theta."""
    h: np.ndarray
    theta: float

    def __post_init__(self):
        h = np.array(self.h, dtype=complex)
        if h.ndim != 2 or min(h.shape) < 1:
            raise ValueError(f"Channel must be a non-empty matrix, got shape {h.shape}")
        if not np.all(np.isfinite(h)):
            raise ValueError("Channel entries must be finite")
        if self.theta < 0:
            raise ValueError(f"theta must be non-negative, got {self.theta}")
        h.setflags(write=False)
        object.__setattr__(self, "h", h)

    @property
    def n_r(self) -> int:
        return self.h.shape[0]

    @property
    def n_t(self) -> int:
        return self.h.shape[1]


def derive_seed(master_seed: int, *keys: int) -> int:
    """Child seed for a (master, keys...) counter, independent of execution order."""
    seq = np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(k) for k in keys))
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def _box_muller(rng: np.random.Generator, shape) -> np.ndarray:
    # 1 - U keeps the log argument inside (0, 1]
    u1 = 1.0 - rng.random(shape)
    u2 = rng.random(shape)
    radius = np.sqrt(-2.0 * np.log(u1))
    return radius * np.cos(TWO_PI * u2) + 1j * radius * np.sin(TWO_PI * u2)


def generate_channel(n_r: int, n_t: int, theta: float, rng_seed: int) -> ChannelRealization:
    """
    Draw a channel with i.i.d. zero-mean circularly-symmetric complex Gaussian entries.

    Each entry is theta * (X + iY) with X, Y ~ N(0, 1/2), sampled by Box-Muller
    from a PCG64 stream seeded with ``rng_seed``.
    """
    if n_r < 1 or n_t < 1:
        raise ValueError(f"Antenna counts must be positive, got n_r={n_r}, n_t={n_t}")
    if theta <= 0:
        raise ValueError(f"theta must be positive, got {theta}")

    rng = np.random.Generator(np.random.PCG64(int(rng_seed)))
    entries = _box_muller(rng, (n_r, n_t)) * np.sqrt(0.5)
    return ChannelRealization(h=theta * entries, theta=float(theta))
