"""Gibbs states, free energies, capping functions and thermal inequalities.

Natural units: k_B = 1, temperature in energy units, entropy in nats. All
matrix functions go through a full Hermitian eigendecomposition, which is
cached on :class:`Hamiltonian`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy.special import logsumexp, softmax

from .info import DensityMatrix, kron_states, partial_trace, q_cond_entropy, vn_entropy
from .sampling import random_hermitian, random_unitary

HERMITIAN_TOL = 1e-10


@dataclass(frozen=True)
class Hamiltonian:
    """Hermitian energy matrix with a cached spectral decomposition."""

    matrix: np.ndarray
    energies: np.ndarray = field(init=False, repr=False)
    vectors: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("Hamiltonian must be a square matrix")
        dev = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
        if dev > HERMITIAN_TOL:
            raise ValueError(f"Hamiltonian is not Hermitian (deviation {dev:.2e})")
        m = (m + m.conj().T) / 2
        w, v = np.linalg.eigh(m)
        for name, val in (("matrix", m), ("energies", w), ("vectors", v)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def ground_energy(self) -> float:
        return float(self.energies[0])

    def __add__(self, other) -> "Hamiltonian":
        return Hamiltonian(self.matrix + as_hamiltonian(other).matrix)

    def __sub__(self, other) -> "Hamiltonian":
        return Hamiltonian(self.matrix - as_hamiltonian(other).matrix)


@dataclass(frozen=True)
class ThermalParams:
    """Inverse temperature; ``temperature`` is its reciprocal."""

    beta: float

    def __post_init__(self):
        if not (self.beta > 0 and math.isfinite(self.beta)):
            raise ValueError(f"beta must be positive and finite, got {self.beta!r}")

    @property
    def temperature(self) -> float:
        return 1.0 / self.beta

    @classmethod
    def from_temperature(cls, temperature: float) -> "ThermalParams":
        return cls(1.0 / temperature)


def as_hamiltonian(h) -> Hamiltonian:
    return h if isinstance(h, Hamiltonian) else Hamiltonian(h)


def _beta(t) -> float:
    return t.beta if isinstance(t, ThermalParams) else ThermalParams(float(t)).beta


def _weights(h: Hamiltonian, beta: float) -> np.ndarray:
    return softmax(-beta * (h.energies - h.energies[0]))


def _rho_matrix(rho) -> np.ndarray:
    return rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)


def _same_dim(h: Hamiltonian, m: np.ndarray) -> None:
    if m.shape != h.matrix.shape:
        raise ValueError(f"dimension mismatch: state {m.shape} vs Hamiltonian {h.matrix.shape}")


# ---------------------------------------------------------------------------
# Gibbs-state quantities


def log_partition_function(h, t) -> float:
    h, beta = as_hamiltonian(h), _beta(t)
    return float(logsumexp(-beta * h.energies))


def partition_function(h, t) -> float:
    """Z = sum_j exp(-beta E_j). May overflow/underflow at extreme beta;
    use :func:`free_energy` or :func:`log_partition_function` there."""
    return math.exp(log_partition_function(h, t))


def gibbs_state(h, t, factors=None) -> DensityMatrix:
    h, beta = as_hamiltonian(h), _beta(t)
    w = _weights(h, beta)
    m = (h.vectors * w) @ h.vectors.conj().T
    return DensityMatrix((m + m.conj().T) / 2, factors, check=False)


def free_energy(h, t) -> float:
    """F = -T ln Z, evaluated as E0 - T ln sum exp(-beta (E_j - E0))."""
    h, beta = as_hamiltonian(h), _beta(t)
    shifted = logsumexp(-beta * (h.energies - h.energies[0]))
    return float(h.energies[0] - shifted / beta)


def mean_energy(h, t) -> float:
    h, beta = as_hamiltonian(h), _beta(t)
    return float(np.dot(_weights(h, beta), h.energies))


def energy_variance(h, t) -> float:
    h, beta = as_hamiltonian(h), _beta(t)
    w = _weights(h, beta)
    mu = np.dot(w, h.energies)
    return float(np.dot(w, (h.energies - mu) ** 2))


def thermal_entropy(h, t) -> float:
    """Entropy of the Gibbs state, from the Boltzmann weights."""
    h, beta = as_hamiltonian(h), _beta(t)
    w = _weights(h, beta)
    w = w[w > 0]
    return float(-np.sum(w * np.log(w)))


def expectation(h, rho) -> float:
    """<H>_rho = Tr(rho H)."""
    h = as_hamiltonian(h)
    m = _rho_matrix(rho)
    _same_dim(h, m)
    return float(np.real(np.sum(m * h.matrix.T)))


# ---------------------------------------------------------------------------
# capping functions


def s_cap(h, t, rho) -> float:
    """Entropy capping function beta (<H>_rho - F)."""
    beta = _beta(t)
    return beta * (expectation(h, rho) - free_energy(h, beta))


def f_cap(h, t, rho) -> float:
    """Free-energy capping function <H>_rho - T S(rho)."""
    beta = _beta(t)
    return expectation(h, rho) - vn_entropy(_rho_matrix(rho)) / beta


# ---------------------------------------------------------------------------
# checkers


class MonotoneReport(NamedTuple):
    betas: np.ndarray
    variance: np.ndarray
    fd_entropy: np.ndarray  # -dS/(beta dbeta)
    fd_energy: np.ndarray  # -d<H>/dbeta
    fd_free_energy: np.ndarray  # dF/dbeta
    entropy_over_beta2: np.ndarray  # S/beta^2
    max_rel_error: float
    monotone: bool


def _rel_err(approx, exact, atol):
    return np.abs(approx - exact) / np.maximum(np.abs(exact), atol)


def check_energy_entropy_monotone(
    h, betas: Sequence[float], rel_step: float = 1e-5, atol: float = 1e-4
) -> MonotoneReport:
    """Compare central finite differences with the analytic energy variance.

    ``max_rel_error`` is the worst relative error over the three derivative
    identities; values with magnitude below ``atol`` are compared absolutely.
    ``monotone`` states that S and <H> are non-increasing and F
    non-decreasing in beta along the sorted grid.
    """
    h = as_hamiltonian(h)
    b = np.sort(np.asarray(betas, dtype=float))
    var = np.array([energy_variance(h, x) for x in b])
    fd_s, fd_e, fd_f, s_b2 = [], [], [], []
    for x in b:
        d = rel_step * x
        sp, sm = thermal_entropy(h, x + d), thermal_entropy(h, x - d)
        ep, em = mean_energy(h, x + d), mean_energy(h, x - d)
        fp, fm = free_energy(h, x + d), free_energy(h, x - d)
        fd_s.append(-(sp - sm) / (2 * d) / x)
        fd_e.append(-(ep - em) / (2 * d))
        fd_f.append((fp - fm) / (2 * d))
        s_b2.append(thermal_entropy(h, x) / x**2)
    fd_s, fd_e, fd_f, s_b2 = map(np.array, (fd_s, fd_e, fd_f, s_b2))
    err = max(
        _rel_err(fd_s, var, atol).max(),
        _rel_err(fd_e, var, atol).max(),
        _rel_err(fd_f, s_b2, atol).max(),
    )
    s = np.array([thermal_entropy(h, x) for x in b])
    e = np.array([mean_energy(h, x) for x in b])
    f = np.array([free_energy(h, x) for x in b])
    tol = 1e-12 * (1 + np.abs(h.energies).max())
    monotone = bool(
        np.all(np.diff(s) <= tol) and np.all(np.diff(e) <= tol) and np.all(np.diff(f) >= -tol)
    )
    return MonotoneReport(b, var, fd_s, fd_e, fd_f, s_b2, float(err), monotone)


def peierls_bogoliubov_check(h1, h2, t) -> float:
    """Slack of F(h2) <= F(h1) + <h2 - h1> in the Gibbs state of h1."""
    h1, h2 = as_hamiltonian(h1), as_hamiltonian(h2)
    if h1.dim != h2.dim:
        raise ValueError("dimension mismatch between Hamiltonians")
    beta = _beta(t)
    rho1 = gibbs_state(h1, beta)
    return free_energy(h1, beta) + expectation(h2 - h1, rho1) - free_energy(h2, beta)


class SandwichSlacks(NamedTuple):
    lower: float  # F(H+dH) - F(H) - <dH>_{rho(H+dH)}
    upper: float  # F(H) + <dH>_{rho(H)} - F(H+dH)
    superadditivity: float  # F(H+dH) - F(H) - F(dH)


def free_energy_sandwich_check(h, dh, t) -> SandwichSlacks:
    """Slacks of the two-sided free-energy bound and of superadditivity."""
    h, dh = as_hamiltonian(h), as_hamiltonian(dh)
    if h.dim != dh.dim:
        raise ValueError("dimension mismatch between Hamiltonians")
    beta = _beta(t)
    full = h + dh
    f, f_full = free_energy(h, beta), free_energy(full, beta)
    lower = f_full - f - expectation(dh, gibbs_state(full, beta))
    upper = f + expectation(dh, gibbs_state(h, beta)) - f_full
    sup = f_full - f - free_energy(dh, beta)
    return SandwichSlacks(lower, upper, sup)


def no_free_lunch_check(h, t, rho) -> float:
    """Slack of F(H) <= <H>_rho (entropy of rho is non-negative)."""
    return expectation(h, rho) - free_energy(h, t)


def entropy_bounds_check(h, t, rho) -> tuple[float, float]:
    """Slacks of S(rho) <= s_cap and F <= f_cap, i.e. both equal the
    relative entropy to the Gibbs state (scaled by T for the second)."""
    beta = _beta(t)
    return (
        s_cap(h, beta, rho) - vn_entropy(_rho_matrix(rho)),
        f_cap(h, beta, rho) - free_energy(h, beta),
    )


# ---------------------------------------------------------------------------
# CAIN free-energy bound


@dataclass(frozen=True)
class CouplingSplit:
    """Joint Hamiltonian h_X (x) I + I (x) h_theta + eps on X (x) Theta.

    ``eps_ratio`` enforces ``||eps||_2 <= eps_ratio * min(||h_X||_2,
    ||h_theta||_2)``; pass ``None`` to skip the smallness check.
    """

    h_x: Hamiltonian
    h_theta: Hamiltonian
    eps: np.ndarray
    eps_ratio: float | None = 0.1

    def __post_init__(self):
        hx, ht = as_hamiltonian(self.h_x), as_hamiltonian(self.h_theta)
        object.__setattr__(self, "h_x", hx)
        object.__setattr__(self, "h_theta", ht)
        n = hx.dim * ht.dim
        eps = np.zeros((n, n), dtype=complex) if self.eps is None else np.array(self.eps, dtype=complex)
        if eps.shape != (n, n):
            raise ValueError(f"eps must be {n}x{n}")
        if np.max(np.abs(eps - eps.conj().T), initial=0.0) > HERMITIAN_TOL:
            raise ValueError("eps is not Hermitian")
        object.__setattr__(self, "eps", eps)
        if self.eps_ratio is not None:
            bound = self.eps_ratio * min(np.linalg.norm(hx.matrix, 2), np.linalg.norm(ht.matrix, 2))
            if np.linalg.norm(eps, 2) > bound + 1e-15:
                raise ValueError("coupling eps is not small relative to the local Hamiltonians")

    @property
    def factors(self):
        return (("X", self.h_x.dim), ("Theta", self.h_theta.dim))

    @property
    def delta_h(self) -> Hamiltonian:
        """Theta Hamiltonian plus coupling, on the joint space."""
        return Hamiltonian(np.kron(np.eye(self.h_x.dim), self.h_theta.matrix) + self.eps)

    @property
    def total(self) -> Hamiltonian:
        return Hamiltonian(np.kron(self.h_x.matrix, np.eye(self.h_theta.dim))) + self.delta_h


class InitialStateError(ValueError):
    """The initial state is not the product of Gibbs states."""


@dataclass(frozen=True)
class CainBoundReport:
    lhs_free_drop: float
    lhs_theta_term: float
    rhs_free_drop: float
    cain_delta: float
    satisfied: bool
    tol: float = 1e-9

    @property
    def slack(self) -> float:
        return self.rhs_free_drop - self.lhs_free_drop - self.lhs_theta_term

    @property
    def cain_holds(self) -> bool:
        return self.cain_delta >= -self.tol

    @property
    def violation(self) -> bool:
        """True only when the premise holds and the bound fails."""
        return self.cain_holds and not self.satisfied

    def to_dict(self) -> dict:
        return {
            "lhs_free_drop": self.lhs_free_drop,
            "lhs_theta_term": self.lhs_theta_term,
            "rhs_free_drop": self.rhs_free_drop,
            "cain_delta": self.cain_delta,
            "slack": self.slack,
            "cain_holds": self.cain_holds,
            "satisfied": self.satisfied,
        }


def conditional_free_energy(h_x: Hamiltonian, delta_h: Hamiltonian, beta: float) -> float:
    """F(h_X + dH) - F(h_X): free energy of dH given the X Hamiltonian."""
    n_theta = delta_h.dim // h_x.dim
    full = Hamiltonian(np.kron(h_x.matrix, np.eye(n_theta))) + delta_h
    return free_energy(full, beta) - free_energy(h_x, beta)


def cain_bound_report(
    split: CouplingSplit,
    t,
    rho0,
    rho_tau,
    h_x_initial=None,
    tol: float = 1e-9,
    product_tol: float = 1e-8,
) -> CainBoundReport:
    """Evaluate the free-energy lower bound implied by the CAIN.

    Parameters
    ----------
    split : CouplingSplit
        Hamiltonians at the final time. At time 0 the coupling vanishes and
        the X Hamiltonian is ``h_x_initial`` (defaults to ``split.h_x``).
    t : float or ThermalParams
        Inverse temperature of both initial Gibbs states.
    rho0, rho_tau : DensityMatrix or array
        Joint states on X (x) Theta. ``rho0`` must be the product of Gibbs
        states of ``h_x_initial`` and ``split.h_theta``.

    Notes
    -----
    With ``G_X = <h_X> - T S(X)`` and ``K = <dH> - F(h_X + dH) + F(h_X)``
    the bound reads ``-(G_X)[0,tau] - (K)[0,tau] <= -(F_X)[0,tau]``; the
    three report fields are those three differences.
    """
    beta = _beta(t)
    temp = 1.0 / beta
    hx_tau = split.h_x
    hx_0 = split.h_x if h_x_initial is None else as_hamiltonian(h_x_initial)
    if hx_0.dim != hx_tau.dim:
        raise ValueError("initial and final X Hamiltonians differ in dimension")
    factors = split.factors
    m0, mt = _rho_matrix(rho0), _rho_matrix(rho_tau)
    n = hx_tau.dim * split.h_theta.dim
    for m in (m0, mt):
        if m.shape != (n, n):
            raise ValueError(f"dimension mismatch: state {m.shape}, joint space {n}")
    expected = kron_states(
        gibbs_state(hx_0, beta, (factors[0],)), gibbs_state(split.h_theta, beta, (factors[1],))
    )
    dev = np.max(np.abs(m0 - expected.matrix))
    if dev > product_tol:
        raise InitialStateError(f"initial state deviates from the Gibbs product by {dev:.2e}")

    r0 = DensityMatrix(m0, factors, check=False)
    rt = DensityMatrix(mt, factors, check=False)
    x0, xt = partial_trace(r0, "X"), partial_trace(rt, "X")

    def x_free(hx, x_state):
        return expectation(hx, x_state) - temp * vn_entropy(x_state)

    def theta_term(hx, dh, joint):
        return expectation(dh, joint) - conditional_free_energy(hx, dh, beta)

    dh0 = Hamiltonian(np.kron(np.eye(hx_0.dim), split.h_theta.matrix))
    dht = split.delta_h
    lhs_free = -(x_free(hx_tau, xt) - x_free(hx_0, x0))
    lhs_theta = -(theta_term(hx_tau, dht, mt) - theta_term(hx_0, dh0, m0))
    rhs = -(free_energy(hx_tau, beta) - free_energy(hx_0, beta))
    delta = q_cond_entropy(rt, "Theta", "X") - q_cond_entropy(r0, "Theta", "X")
    satisfied = lhs_free + lhs_theta <= rhs + tol
    return CainBoundReport(lhs_free, lhs_theta, rhs, delta, bool(satisfied), tol)


def controlled_unital_channel(x_basis: np.ndarray, unitaries, weights):
    """Channel rho -> sum_k w_k V_k rho V_k^dag with
    ``V_k = sum_x |e_x><e_x| (x) U_{x,k}`` in the basis ``x_basis`` (columns).

    Each Theta map, conditioned on an X eigenstate, is a mixture of unitaries
    and therefore unital, so the conditional entropy S(Theta|X) of any state
    block diagonal in that basis cannot decrease.
    """
    nx = x_basis.shape[0]
    ops = []
    for k in range(len(weights)):
        v = sum(
            np.kron(np.outer(x_basis[:, x], x_basis[:, x].conj()), unitaries[x][k]) for x in range(nx)
        )
        ops.append(v)
    w = np.asarray(weights, dtype=float)

    def apply(rho):
        m = _rho_matrix(rho)
        return sum(wk * v @ m @ v.conj().T for wk, v in zip(w, ops))

    return apply


def parity_copy_unitary(nx: int, ntheta: int) -> np.ndarray:
    """Permutation |x, th> -> |x xor (th mod 2), th> (for nx = 2).

    Writes information about Theta into X, which can lower S(Theta|X).
    """
    if nx != 2:
        raise ValueError("parity copy needs a two-level X")
    n = nx * ntheta
    u = np.zeros((n, n))
    for x in range(nx):
        for th in range(ntheta):
            u[((x ^ (th % 2)) * ntheta + th), x * ntheta + th] = 1.0
    return u


def gibbs_product(split: CouplingSplit, t) -> DensityMatrix:
    """Product of the X and Theta Gibbs states, the required initial state."""
    beta = _beta(t)
    (fx, ft) = split.factors
    return kron_states(gibbs_state(split.h_x, beta, (fx,)), gibbs_state(split.h_theta, beta, (ft,)))


def random_cain_instance(rng: np.random.Generator, nx: int = 2, ntheta: int = 3, n_kraus: int = 3):
    """One generated CAIN-family dynamics: ``(split, beta, rho0, rho_tau)``.

    Diagonal local Hamiltonians with gaps in [0, 1], a random Hermitian
    coupling scaled to the smallness bound, beta in [10^-0.5, 10^0.5] and a
    controlled mixture of Theta unitaries as the evolution.
    """
    hx = np.diag(np.sort(rng.uniform(0, 1, nx)))
    ht = np.diag(np.sort(rng.uniform(0, 1, ntheta)))
    eps = random_hermitian(nx * ntheta, rng, scale=0.02)
    bound = 0.1 * min(np.linalg.norm(hx, 2), np.linalg.norm(ht, 2))
    eps *= min(1.0, bound / np.linalg.norm(eps, 2))
    split = CouplingSplit(hx, ht, eps)
    beta = float(10 ** rng.uniform(-0.5, 0.5))
    rho0 = gibbs_product(split, beta)
    unitaries = [[random_unitary(ntheta, rng) for _ in range(n_kraus)] for _ in range(nx)]
    chan = controlled_unital_channel(np.eye(nx), unitaries, rng.dirichlet(np.ones(n_kraus)))
    return split, beta, rho0, chan(rho0.matrix)


def counter_dynamics_instance(ntheta: int = 3):
    """Feedback dynamics that lowers S(Theta|X): a cold two-level X records
    the parity of a hot Theta. Returns ``(split, beta, rho0, rho_tau)``."""
    split = CouplingSplit(np.diag([0.0, 5.0]), np.diag(np.linspace(0.0, 0.1, ntheta)), None)
    beta = 1.0
    rho0 = gibbs_product(split, beta)
    u = parity_copy_unitary(2, ntheta)
    return split, beta, rho0, u @ rho0.matrix @ u.T
