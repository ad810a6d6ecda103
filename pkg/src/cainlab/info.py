"""Classical and quantum information kernel.

Entropies are in nats throughout. Classical distributions carry named axes so
that callers can refer to variables such as ``s0`` or ``sigma1`` by name;
density matrices carry named tensor factors for the same reason.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.special import xlogy

#: Sentinel returned by divergences when absolute continuity fails.
INF = math.inf

PROB_TOL = 1e-12
DENSITY_TOL = 1e-10
EIG_FLOOR = 1e-14


class InvalidDistributionError(ValueError):
    """Negative entries or total mass different from one."""


class FactorError(ValueError):
    """Unknown, duplicated or overlapping axis/factor names."""


def _names(axes: str | Iterable[str]) -> tuple[str, ...]:
    if isinstance(axes, str):
        return (axes,)
    return tuple(axes)


def _check_probs(p: np.ndarray, tol: float = PROB_TOL) -> None:
    if not np.all(np.isfinite(p)):
        raise InvalidDistributionError("non-finite probability")
    if p.size and p.min() < 0.0:
        raise InvalidDistributionError(f"negative probability {p.min():.3e}")
    mass = math.fsum(p.ravel())
    if abs(mass - 1.0) > tol:
        raise InvalidDistributionError(f"total mass {mass!r} differs from 1")


# ---------------------------------------------------------------------------
# classical types


@dataclass(frozen=True)
class ProbVec:
    """A finite probability vector with optional outcome labels."""

    probs: np.ndarray
    labels: tuple | None = None

    def __post_init__(self):
        p = np.array(self.probs, dtype=float).ravel()
        _check_probs(p)
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)
        if self.labels is not None and len(self.labels) != p.size:
            raise ValueError("labels length does not match probs")

    def __len__(self):
        return self.probs.size


@dataclass(frozen=True)
class JointDist:
    """Joint distribution stored as an array with one named axis per variable."""

    table: np.ndarray
    axes: tuple[str, ...]

    def __post_init__(self):
        t = np.array(self.table, dtype=float)
        axes = _names(self.axes)
        if t.ndim != len(axes):
            raise FactorError(f"table has {t.ndim} dims but {len(axes)} axis names")
        if len(set(axes)) != len(axes):
            raise FactorError(f"duplicate axis names in {axes}")
        _check_probs(t)
        t.setflags(write=False)
        object.__setattr__(self, "table", t)
        object.__setattr__(self, "axes", axes)

    @property
    def shape(self) -> dict[str, int]:
        return dict(zip(self.axes, self.table.shape))

    def index(self, name: str) -> int:
        try:
            return self.axes.index(name)
        except ValueError:
            raise FactorError(f"unknown axis {name!r}; have {self.axes}") from None

    def marginal(self, axes: str | Iterable[str]) -> "JointDist":
        """Marginal over ``axes``, returned with axes in the requested order."""
        keep = _names(axes)
        if len(set(keep)) != len(keep):
            raise FactorError(f"duplicate axes in {keep}")
        idx = [self.index(a) for a in keep]
        drop = tuple(i for i in range(len(self.axes)) if i not in idx)
        m = self.table.sum(axis=drop) if drop else self.table
        remaining = [i for i in range(len(self.axes)) if i in idx]
        order = [remaining.index(i) for i in idx]
        return JointDist(np.transpose(m, order), keep)

    def entropy(self, axes: str | Iterable[str] | None = None) -> float:
        if axes is None:
            return _entropy_of(self.table)
        keep = _names(axes)
        if not keep:
            return 0.0
        return _entropy_of(self.marginal(keep).table)


@dataclass(frozen=True)
class TransitionMatrix:
    """Column-stochastic matrix, ``matrix[y, x] = P(y | x)``."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2:
            raise ValueError("transition matrix must be 2-D")
        if not np.all(np.isfinite(m)) or m.min() < 0.0 or m.max() > 1.0 + PROB_TOL:
            raise InvalidDistributionError("transition entries must lie in [0, 1]")
        cols = m.sum(axis=0)
        bad = np.flatnonzero(np.abs(cols - 1.0) > PROB_TOL)
        if bad.size:
            raise InvalidDistributionError(f"columns {bad.tolist()} do not sum to 1")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def shape(self):
        return self.matrix.shape

    @property
    def doubly_stochastic(self) -> bool:
        m = self.matrix
        return m.shape[0] == m.shape[1] and bool(
            np.all(np.abs(m.sum(axis=1) - 1.0) <= PROB_TOL)
        )


# ---------------------------------------------------------------------------
# quantum types


def _factor_tuple(factors, dim: int) -> tuple[tuple[str, int], ...]:
    if factors is None:
        return (("sys", dim),)
    out = tuple((str(n), int(d)) for n, d in factors)
    names = [n for n, _ in out]
    if len(set(names)) != len(names):
        raise FactorError(f"duplicate factor names {names}")
    if math.prod(d for _, d in out) != dim:
        raise FactorError(f"factor dims {out} do not multiply to {dim}")
    return out


@dataclass(frozen=True)
class DensityMatrix:
    """Density matrix on a tensor product of named factors.

    Parameters
    ----------
    matrix : array_like
        Square complex matrix. Factor ordering is row-major (first factor is
        the slowest index), matching ``np.kron`` ordering.
    factors : sequence of (name, dim), optional
        Defaults to a single factor called ``"sys"``.
    check : bool
        Validate Hermiticity, trace and positivity (tolerance 1e-10).
    """

    matrix: np.ndarray
    factors: tuple[tuple[str, int], ...] | None = None
    check: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("density matrix must be square")
        object.__setattr__(self, "factors", _factor_tuple(self.factors, m.shape[0]))
        if self.check:
            herm = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
            if herm > DENSITY_TOL:
                raise ValueError(f"matrix is not Hermitian (deviation {herm:.2e})")
            tr = np.trace(m).real
            if abs(tr - 1.0) > DENSITY_TOL:
                raise ValueError(f"trace {tr!r} differs from 1")
            lo = np.linalg.eigvalsh(m).min()
            if lo < -DENSITY_TOL:
                raise ValueError(f"negative eigenvalue {lo:.3e}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.factors)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(d for _, d in self.factors)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def reorder(self, names: Sequence[str]) -> "DensityMatrix":
        """Same state with tensor factors permuted into ``names`` order."""
        names = tuple(names)
        if sorted(names) != sorted(self.names):
            raise FactorError(f"{names} is not a permutation of {self.names}")
        perm = [self.names.index(n) for n in names]
        n = len(perm)
        t = self.matrix.reshape(self.dims * 2)
        t = np.transpose(t, perm + [p + n for p in perm])
        fac = tuple(self.factors[p] for p in perm)
        return DensityMatrix(t.reshape(self.dim, self.dim), fac, check=False)


@dataclass(frozen=True)
class HybridState:
    """Classical-quantum state, block diagonal in one classical factor.

    ``branches[c] = (p(c), state_c)`` where ``state_c`` lives on the remaining
    factors. ``position`` records where the classical factor sits in the
    original factor ordering so that :meth:`to_density` round-trips.
    """

    axis: str
    axis_dim: int
    position: int
    branches: dict

    def __post_init__(self):
        w = np.array([self.branches[c][0] for c in range(self.axis_dim)])
        _check_probs(w, tol=DENSITY_TOL)

    @property
    def weights(self) -> np.ndarray:
        return np.array([self.branches[c][0] for c in range(self.axis_dim)])

    def to_density(self) -> DensityMatrix:
        rest = self.branches[0][1].factors
        if rest == (("trivial", 1),):
            rest = ()
        d_rest = math.prod(d for _, d in rest)
        dc = self.axis_dim
        blocks = np.zeros((dc, d_rest, dc, d_rest), dtype=complex)
        for c, (p, st) in self.branches.items():
            blocks[c, :, c, :] = p * st.matrix
        factors = ((self.axis, dc),) + tuple(rest)
        rho = DensityMatrix(blocks.reshape(dc * d_rest, -1), factors, check=False)
        order = [n for n, _ in rest]
        order.insert(self.position, self.axis)
        return rho.reorder(order)


# ---------------------------------------------------------------------------
# classical functionals


def _as_probs(p) -> np.ndarray:
    if isinstance(p, ProbVec):
        return p.probs
    arr = np.asarray(p, dtype=float).ravel()
    _check_probs(arr)
    return arr


def _entropy_of(arr: np.ndarray) -> float:
    return float(-np.sum(xlogy(arr, arr)))


def shannon_entropy(p) -> float:
    """Shannon entropy ``-sum p ln p`` of a probability vector, in nats."""
    return _entropy_of(_as_probs(p))


def _disjoint(a, b) -> tuple[tuple[str, ...], tuple[str, ...]]:
    a, b = _names(a), _names(b)
    overlap = set(a) & set(b)
    if overlap:
        raise FactorError(f"axis sets overlap on {sorted(overlap)}")
    return a, b


def cond_entropy(j: JointDist, target, given) -> float:
    """H(target | given) = H(target, given) - H(given)."""
    a, b = _disjoint(target, given)
    return j.entropy(a + b) - j.entropy(b)


def mutual_info(j: JointDist, a, b) -> float:
    """H(a : b) = H(a) + H(b) - H(a, b)."""
    a, b = _disjoint(a, b)
    return j.entropy(a) + j.entropy(b) - j.entropy(a + b)


def kl_divergence(p, q) -> float:
    """Relative entropy ``sum p ln(p/q)``; returns :data:`INF` off-support."""
    p, q = _as_probs(p), _as_probs(q)
    if p.shape != q.shape:
        raise ValueError(f"dimension mismatch {p.shape} vs {q.shape}")
    on = p > 0
    if np.any(q[on] == 0):
        return INF
    return float(np.sum(p[on] * (np.log(p[on]) - np.log(q[on]))))


# ---------------------------------------------------------------------------
# quantum functionals


def _matrix_of(rho) -> np.ndarray:
    if isinstance(rho, DensityMatrix):
        return rho.matrix
    if isinstance(rho, HybridState):
        return rho.to_density().matrix
    m = np.asarray(rho, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("expected a square matrix")
    return m


def _spectrum_entropy(lam: np.ndarray) -> float:
    lam = np.where(lam < EIG_FLOOR, 0.0, lam)
    return float(-np.sum(xlogy(lam, lam)))


def vn_entropy(rho) -> float:
    """Von Neumann entropy in nats; eigenvalues below 1e-14 contribute zero."""
    m = _matrix_of(rho)
    herm = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
    if herm > DENSITY_TOL:
        raise ValueError(f"matrix is not Hermitian (deviation {herm:.2e})")
    return _spectrum_entropy(np.linalg.eigvalsh(m))


def q_relative_entropy(rho, sigma, support_tol: float = 1e-12) -> float:
    """Quantum relative entropy ``Tr rho (ln rho - ln sigma)``.

    Returns :data:`INF` when the support of ``rho`` is not contained in the
    support of ``sigma``.
    """
    a, b = _matrix_of(rho), _matrix_of(sigma)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch {a.shape} vs {b.shape}")
    p, u = np.linalg.eigh(a)
    q, v = np.linalg.eigh(b)
    overlap = np.abs(u.conj().T @ v) ** 2  # overlap[i, j] = |<u_i|v_j>|^2
    p = np.where(p < EIG_FLOOR, 0.0, p)
    null = q < EIG_FLOOR
    if np.any(p[:, None] * overlap[:, null] > support_tol):
        return INF
    logq = np.log(np.where(null, 1.0, q))
    cross = float(np.sum(p[:, None] * overlap[:, ~null] * logq[~null]))
    return float(np.sum(xlogy(p, p))) - cross


def partial_trace(rho: DensityMatrix, keep) -> DensityMatrix:
    """Trace out every factor not listed in ``keep`` (original order kept)."""
    keep = _names(keep)
    for k in keep:
        if k not in rho.names:
            raise FactorError(f"unknown factor {k!r}; have {rho.names}")
    n = len(rho.factors)
    kept = [i for i, name in enumerate(rho.names) if name in keep]
    t = rho.matrix.reshape(rho.dims * 2)
    row = list(range(n))
    col = [i + n if i in kept else i for i in range(n)]
    out = [i for i in kept] + [i + n for i in kept]
    reduced = np.einsum(t, row + col, out)
    d = math.prod(rho.dims[i] for i in kept)
    factors = tuple(rho.factors[i] for i in kept)
    if not factors:
        return DensityMatrix(np.array([[reduced]]), (("trivial", 1),), check=False)
    return DensityMatrix(reduced.reshape(d, d), factors, check=False)


def classicalize(rho: DensityMatrix, axis: str) -> HybridState:
    """Dephase ``rho`` in the computational basis of factor ``axis``."""
    if axis not in rho.names:
        raise FactorError(f"unknown factor {axis!r}; have {rho.names}")
    pos = rho.names.index(axis)
    rest = [n for n in rho.names if n != axis]
    r = rho.reorder([axis] + rest)
    dc = rho.dims[pos]
    d_rest = r.dim // dc
    blocks = r.matrix.reshape(dc, d_rest, dc, d_rest)
    rest_factors = tuple(f for f in r.factors[1:]) or (("trivial", 1),)
    branches = {}
    for c in range(dc):
        b = blocks[c, :, c, :]
        w = float(np.trace(b).real)
        if w > 0.0:
            st = DensityMatrix(b / w, rest_factors, check=False)
        else:
            st = DensityMatrix(np.eye(d_rest) / d_rest, rest_factors, check=False)
            w = 0.0
        branches[c] = (w, st)
    return HybridState(axis, dc, pos, branches)


def dephase(rho: DensityMatrix, axis: str) -> DensityMatrix:
    """Block-diagonal form of ``rho`` in factor ``axis`` (same factor order)."""
    return classicalize(rho, axis).to_density()


def _subsystem_entropy(rho: DensityMatrix, names: tuple[str, ...]) -> float:
    if not names:
        return 0.0
    return vn_entropy(partial_trace(rho, names))


def q_cond_entropy(rho: DensityMatrix, a, b) -> float:
    """S(a | b) = S(a, b) - S(b); may be negative for entangled states."""
    a, b = _disjoint(a, b)
    return _subsystem_entropy(rho, a + b) - _subsystem_entropy(rho, b)


def q_mutual_info(rho: DensityMatrix, a, b) -> float:
    """S(a : b) = S(a) + S(b) - S(a, b)."""
    a, b = _disjoint(a, b)
    return (
        _subsystem_entropy(rho, a)
        + _subsystem_entropy(rho, b)
        - _subsystem_entropy(rho, a + b)
    )


def diagonal_state(j: JointDist) -> DensityMatrix:
    """Embed a joint distribution as a diagonal density matrix."""
    factors = tuple(zip(j.axes, j.table.shape))
    return DensityMatrix(np.diag(j.table.ravel()).astype(complex), factors, check=False)


def kron_states(*states: DensityMatrix) -> DensityMatrix:
    """Tensor product of density matrices, concatenating their factors."""
    m = np.array([[1.0 + 0j]])
    factors: list = []
    for s in states:
        m = np.kron(m, s.matrix)
        factors.extend(s.factors)
    return DensityMatrix(m, tuple(factors), check=False)
