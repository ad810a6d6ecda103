"""Seeded random generators for states, Hamiltonians, channels and kernels."""
from __future__ import annotations

import numpy as np
from scipy.stats import unitary_group

from .info import DensityMatrix

SINKHORN_ITERATIONS = 100
SINKHORN_TOL = 1e-12


def random_hermitian(dim: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """GUE-style Hermitian matrix with entries of order ``scale``."""
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * (g + g.conj().T) / 2


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary."""
    if dim == 1:
        return np.exp(2j * np.pi * rng.random()) * np.ones((1, 1))
    return unitary_group.rvs(dim, random_state=rng)


def random_isometry(n_out: int, n_in: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random isometry ``V`` of shape (n_out, n_in) with ``V^dag V = I``."""
    if n_out < n_in:
        raise ValueError("an isometry needs n_out >= n_in")
    return random_unitary(n_out, rng)[:, :n_in]


def random_pure_amplitudes(shape, rng: np.random.Generator) -> np.ndarray:
    """Normalized complex amplitude tensor of the given shape."""
    a = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    return a / np.linalg.norm(a)


def random_density_matrix(
    dim: int,
    rng: np.random.Generator,
    rank: int | None = None,
    name: str = "sys",
    factors=None,
) -> DensityMatrix:
    """Ginibre-ensemble density matrix, full rank unless ``rank`` is given."""
    k = dim if rank is None else rank
    g = rng.normal(size=(dim, k)) + 1j * rng.normal(size=(dim, k))
    m = g @ g.conj().T
    m = (m + m.conj().T) / 2
    m /= np.trace(m).real
    return DensityMatrix(m, factors if factors is not None else ((name, dim),))


def random_stochastic(n_out: int, n_in: int, rng: np.random.Generator) -> np.ndarray:
    """Column-stochastic matrix with flat-Dirichlet columns."""
    return rng.dirichlet(np.ones(n_out), size=n_in).T


def random_probs(n: int, rng: np.random.Generator) -> np.ndarray:
    return rng.dirichlet(np.ones(n))


def sinkhorn(m: np.ndarray, iterations: int = SINKHORN_ITERATIONS, tol: float = SINKHORN_TOL) -> np.ndarray:
    """Alternate row/column normalization of a positive square matrix.

    Finishes on a column normalization so the result is exactly
    column-stochastic; rows are within ``tol`` once converged.
    """
    m = np.array(m, dtype=float)
    for _ in range(iterations):
        m /= m.sum(axis=1, keepdims=True)
        m /= m.sum(axis=0, keepdims=True)
        if np.max(np.abs(m.sum(axis=1) - 1.0)) < tol:
            break
    return m


def random_doubly_stochastic(n: int, rng: np.random.Generator) -> np.ndarray:
    return sinkhorn(rng.random((n, n)) + 1e-3)
