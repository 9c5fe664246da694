"""Reduced SVD of a channel through cyclic Jacobi on its Gram matrix."""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..errors import EigensolverError
from .realization import ChannelRealization

logger = logging.getLogger(__name__)

JACOBI_TOLERANCE = 1e-13
JACOBI_MAX_SWEEPS = 100

# Singular values below this fraction of the largest are treated as zero
RANK_TOLERANCE = 1e-12


@dataclass(frozen=True)
class SvdDecomposition:
    """
    Reduced SVD H = U diag(lambda) V^H with r = min(N_R, N_T).

    Singular values are non-increasing; zero values of a rank-deficient
    channel are kept so every decomposition has exactly r eigenchannels.
    """
    u: np.ndarray
    lam: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        u = np.array(self.u, dtype=complex)
        lam = np.array(self.lam, dtype=float)
        v = np.array(self.v, dtype=complex)
        r = lam.shape[0]
        if u.shape[1] != r or v.shape[1] != r:
            raise ValueError(
                f"Inconsistent SVD shapes: u {u.shape}, lambda ({r},), v {v.shape}"
            )
        if np.any(lam < 0) or np.any(np.diff(lam) > 0):
            raise ValueError("Singular values must be non-negative and non-increasing")
        for arr in (u, lam, v):
            arr.setflags(write=False)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "v", v)

    @property
    def r(self) -> int:
        return self.lam.shape[0]

    @property
    def n_r(self) -> int:
        return self.u.shape[0]

    @property
    def n_t(self) -> int:
        return self.v.shape[0]

    @property
    def gains(self) -> np.ndarray:
        """Eigenchannel power gains lambda_i^2."""
        return self.lam ** 2

    @property
    def matrix(self) -> np.ndarray:
        """Reconstructed channel U diag(lambda) V^H."""
        return (self.u * self.lam) @ self.v.conj().T

    @classmethod
    def from_diagonal(cls, lam) -> "SvdDecomposition":
        """Decomposition of a square diagonal channel with descending entries."""
        lam = np.asarray(lam, dtype=float)
        eye = np.eye(lam.shape[0], dtype=complex)
        return cls(u=eye, lam=lam, v=eye)


def _off_diagonal_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.sqrt(np.sum(np.abs(off) ** 2)))


def jacobi_eigh(a: np.ndarray, tol: float = JACOBI_TOLERANCE,
                max_sweeps: int = JACOBI_MAX_SWEEPS) -> Tuple[np.ndarray, np.ndarray, int]:
    """
    Eigen-decompose a Hermitian matrix by cyclic complex Jacobi rotations.

    Each rotation first removes the phase of a[p, q] and then applies the
    real symmetric Jacobi rotation that zeroes it.

    Args:
        a: Hermitian matrix
        tol: Target off-diagonal Frobenius norm relative to the full norm
        max_sweeps: Sweep cap before giving up

    Returns:
        (eigenvalues, eigenvectors as columns, sweeps used), unsorted

    Raises:
        EigensolverError: off-diagonal norm still above ``tol`` after the cap
    """
    a = np.array(a, dtype=complex)
    n = a.shape[0]
    if a.ndim != 2 or a.shape[1] != n:
        raise ValueError(f"Jacobi eigensolver needs a square matrix, got {a.shape}")
    a = 0.5 * (a + a.conj().T)
    vecs = np.eye(n, dtype=complex)

    scale = float(np.linalg.norm(a))
    if scale == 0.0 or n == 1:
        return np.real(np.diag(a)).copy(), vecs, 0

    residual = _off_diagonal_norm(a) / scale
    sweeps = 0
    while residual > tol:
        if sweeps >= max_sweeps:
            raise EigensolverError(residual=residual, sweeps=sweeps)
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                magnitude = abs(apq)
                if magnitude <= tol * scale * 1e-3:
                    continue
                phase = apq / magnitude
                tau = (a[q, q].real - a[p, p].real) / (2.0 * magnitude)
                sign = 1.0 if tau >= 0 else -1.0
                t = sign / (abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c

                rot = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ rot
                a[idx, :] = rot.conj().T @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                vecs[:, idx] = vecs[:, idx] @ rot
        residual = _off_diagonal_norm(a) / scale

    logger.debug(f"Jacobi converged in {sweeps} sweeps (residual {residual:.2e})")
    return np.real(np.diag(a)).copy(), vecs, sweeps


def _left_vectors(h: np.ndarray, lam: np.ndarray, v: np.ndarray) -> np.ndarray:
    """U = H V diag(lambda)^-1, orthonormalized, with zero-gain columns completed by QR."""
    n_r = h.shape[0]
    r = lam.shape[0]
    nonzero = int(np.count_nonzero(lam > 0))

    u_raw = (h @ v[:, :nonzero]) / lam[:nonzero]
    stacked = np.hstack([u_raw, np.eye(n_r, dtype=complex)])
    q, upper = np.linalg.qr(stacked)
    # QR fixes each column only up to a phase; realign with H v / lambda
    diag = np.diag(upper)[:nonzero]
    phases = np.ones(r, dtype=complex)
    phases[:nonzero] = diag / np.abs(diag)
    return q[:, :r] * phases


def decompose(ch: ChannelRealization) -> SvdDecomposition:
    """
    Reduced SVD of ``ch.h`` with singular values in non-increasing order.

    Eigenvalues of H^H H come from ``jacobi_eigh``; ties keep their original
    index order.
    """
    h = ch.h
    r = min(ch.n_r, ch.n_t)

    eigvals, eigvecs, _ = jacobi_eigh(h.conj().T @ h)
    order = np.argsort(-eigvals, kind="stable")[:r]
    eigvals = np.clip(eigvals[order], 0.0, None)
    v = eigvecs[:, order]

    lam = np.sqrt(eigvals)
    if lam[0] > 0:
        lam[lam <= RANK_TOLERANCE * lam[0]] = 0.0
    else:
        logger.warning("Decomposing an all-zero channel")

    u = _left_vectors(h, lam, v)
    return SvdDecomposition(u=u, lam=lam, v=v)
