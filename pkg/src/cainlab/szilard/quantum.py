"""Quantum Szilard engines Q1 (system s) and Q2 (system x = (s, t)).

States are assembled from amplitude tensors:

* ``a_init[x, r]``: purification of the initial system state (r traced out);
* ``a_meas[x1, sigma1, x0]``: measurement isometry acting on x0 with the
  sensor prepared in sigma0 = 0 (the sensor is then classicalized);
* ``a_feedback[sigma, x2, e, x1]``: for each sensor value, an isometry from
  x1 into x2 and an environment register e that is traced out. ``e`` has
  dimension one for plain unitary feedback.

The final slice re-prepares the system from ``a_init`` and erases the sensor.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..info import DensityMatrix, classicalize, partial_trace, q_cond_entropy, q_mutual_info, shannon_entropy, vn_entropy
from ..sampling import random_isometry, random_pure_amplitudes, random_unitary
from .classical import C1Params, C2Params
from .table import LegTable, leg_differences

NORM_TOL = 1e-12
ISOMETRY_TOL = 1e-10


class IsometryError(ValueError):
    """A tensor violates its normalization or isometry constraint."""


def _check_isometry(v: np.ndarray, name: str) -> None:
    dev = np.max(np.abs(v.conj().T @ v - np.eye(v.shape[1])))
    if dev > ISOMETRY_TOL:
        raise IsometryError(f"{name} is not an isometry (deviation {dev:.2e})")


def _normalize_tensors(a_init, a_meas, a_feedback, x_dims, n_sigma):
    """Flatten tensors to (dx, nr), (dx, nsig, dx), (nsig, dx, ne, dx) and
    validate them."""
    dx = math.prod(x_dims)
    k = len(x_dims)
    a_init = np.asarray(a_init, dtype=complex)
    if a_init.ndim == 2 and a_init.shape[0] == dx:
        a_init = a_init.reshape(tuple(x_dims) + (-1,))  # already flattened
    if a_init.shape[:k] != tuple(x_dims) or a_init.ndim != k + 1:
        raise ValueError(f"a_init must have shape {tuple(x_dims)} + (n_r,), got {a_init.shape}")
    a_init = a_init.reshape(dx, -1)
    norm = float(np.sum(np.abs(a_init) ** 2))
    if abs(norm - 1.0) > NORM_TOL:
        raise IsometryError(f"a_init has squared norm {norm!r}, expected 1")

    a_meas = np.asarray(a_meas, dtype=complex)
    full = tuple(x_dims) + (n_sigma,) + tuple(x_dims) + (n_sigma,)
    short = tuple(x_dims) + (n_sigma,) + tuple(x_dims)
    if a_meas.shape == (dx, n_sigma, dx):
        a_meas = a_meas.reshape(short)
    if a_meas.shape == full:
        _check_isometry(a_meas.reshape(dx * n_sigma, dx * n_sigma), "a_meas")
        a_meas = a_meas[..., 0]
    elif a_meas.shape != short:
        raise ValueError(f"a_meas must have shape {short} or {full}, got {a_meas.shape}")
    a_meas = a_meas.reshape(dx, n_sigma, dx)
    _check_isometry(a_meas.reshape(dx * n_sigma, dx), "a_meas")

    fb = np.asarray(a_feedback, dtype=complex)
    lead = (n_sigma,) + tuple(x_dims)
    if fb.ndim == 4 and fb.shape[:2] == (n_sigma, dx) and fb.shape[3] == dx:
        pass  # already flattened
    elif fb.shape == lead + tuple(x_dims):
        fb = fb.reshape(n_sigma, dx, 1, dx)
    elif fb.ndim == 2 * k + 2 and fb.shape[: k + 1] == lead and fb.shape[k + 2 :] == tuple(x_dims):
        fb = fb.reshape(n_sigma, dx, fb.shape[k + 1], dx)
    else:
        raise ValueError(f"a_feedback must have shape {lead} + (n_e,) + {tuple(x_dims)}, got {fb.shape}")
    for sig in range(n_sigma):
        _check_isometry(fb[sig].reshape(-1, dx), f"a_feedback[sigma={sig}]")
    return a_init, a_meas, fb


@dataclass(frozen=True)
class Q1Params:
    """Amplitude tensors for the one-particle quantum engine.

    Shapes: ``a_init`` (n_s, n_r); ``a_meas`` (n_s, n_sigma, n_s) or the full
    isometry (n_s, n_sigma, n_s, n_sigma); ``a_feedback`` (n_sigma, n_s, n_s)
    for per-sigma unitaries or (n_sigma, n_s, n_e, n_s) with an environment.
    """

    a_init: np.ndarray
    a_meas: np.ndarray
    a_feedback: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a_init)
        n_s = a.shape[0]
        n_sigma = np.asarray(self.a_meas).shape[1]
        ai, am, fb = _normalize_tensors(self.a_init, self.a_meas, self.a_feedback, (n_s,), n_sigma)
        object.__setattr__(self, "a_init", ai)
        object.__setattr__(self, "a_meas", am)
        object.__setattr__(self, "a_feedback", fb)

    x_factors = property(lambda self: (("s", self.a_init.shape[0]),))
    n_sigma = property(lambda self: self.a_meas.shape[1])

    def to_dict(self) -> dict:
        return {"case": "q1", **_tensor_dict(self)}


@dataclass(frozen=True)
class Q2Params:
    """As :class:`Q1Params` with system x = (s, t).

    Shapes: ``a_init`` (n_s, n_t, n_r); ``a_meas`` (n_s, n_t, n_sigma, n_s,
    n_t); ``a_feedback`` (n_sigma, n_s, n_t, n_s, n_t) or with an n_e axis
    after the output (s, t) indices.
    """

    a_init: np.ndarray
    a_meas: np.ndarray
    a_feedback: np.ndarray
    n_s: int = 0
    n_t: int = 0

    def __post_init__(self):
        a = np.asarray(self.a_init)
        n_s, n_t = (a.shape[0], a.shape[1]) if a.ndim == 3 else (self.n_s, self.n_t)
        if a.ndim != 3 and not (n_s and n_t):
            raise ValueError("a_init must have shape (n_s, n_t, n_r)")
        m = np.asarray(self.a_meas)
        n_sigma = m.shape[2] if m.ndim >= 5 else m.shape[1]
        ai, am, fb = _normalize_tensors(
            a if a.ndim == 3 else a.reshape(n_s, n_t, -1),
            m if m.ndim >= 5 else m.reshape(n_s, n_t, n_sigma, n_s, n_t),
            self.a_feedback,
            (n_s, n_t),
            n_sigma,
        )
        object.__setattr__(self, "a_init", ai)
        object.__setattr__(self, "a_meas", am)
        object.__setattr__(self, "a_feedback", fb)
        object.__setattr__(self, "n_s", n_s)
        object.__setattr__(self, "n_t", n_t)

    x_factors = property(lambda self: (("s", self.n_s), ("t", self.n_t)))
    n_sigma = property(lambda self: self.a_meas.shape[1])

    def to_dict(self) -> dict:
        return {"case": "q2", "n_s": self.n_s, "n_t": self.n_t, **_tensor_dict(self)}


def _complex_list(a: np.ndarray):
    return np.stack([a.real, a.imag], axis=-1).tolist()


def _tensor_dict(p) -> dict:
    return {
        "a_init": _complex_list(p.a_init),
        "a_meas": _complex_list(p.a_meas),
        "a_feedback": _complex_list(p.a_feedback),
    }


@dataclass(frozen=True)
class QuantumStates:
    """Density matrices at tau = 0..3 on factors x-factors + ("sigma",)."""

    rho: tuple

    def hybrid(self, tau: int):
        return classicalize(self.rho[tau], "sigma")

    def __getitem__(self, tau: int) -> DensityMatrix:
        return self.rho[tau]


def _embed_blocks(blocks, factors) -> DensityMatrix:
    """Block-diagonal matrix with sensor value sigma as the last factor."""
    n_sigma = len(blocks)
    dx = blocks[0].shape[0]
    full = np.zeros((dx, n_sigma, dx, n_sigma), dtype=complex)
    for sig, b in enumerate(blocks):
        full[:, sig, :, sig] = b
    m = full.reshape(dx * n_sigma, dx * n_sigma)
    return DensityMatrix((m + m.conj().T) / 2, factors, check=False)


def _build(params) -> QuantumStates:
    a, meas, fb = params.a_init, params.a_meas, params.a_feedback
    n_sigma = params.n_sigma
    factors = params.x_factors + (("sigma", n_sigma),)
    rx0 = a @ a.conj().T
    sensor0 = [rx0] + [np.zeros_like(rx0)] * (n_sigma - 1)
    rho0 = _embed_blocks(sensor0, factors)
    # measurement, then dephasing of the sensor
    amp1 = np.einsum("ysx,xr->ysr", meas, a)
    blocks1 = [amp1[:, s, :] @ amp1[:, s, :].conj().T for s in range(n_sigma)]
    rho1 = _embed_blocks(blocks1, factors)
    # sensor-controlled feedback channel, environment traced
    blocks2 = [np.einsum("yex,xz,wez->yw", fb[s], blocks1[s], fb[s].conj()) for s in range(n_sigma)]
    rho2 = _embed_blocks(blocks2, factors)
    rho3 = rho0  # fresh system from a_init, sensor erased to 0
    return QuantumStates((rho0, rho1, rho2, rho3))


def build_q1(params: Q1Params) -> QuantumStates:
    return _build(params)


def build_q2(params: Q2Params) -> QuantumStates:
    return _build(params)


# --- dual-path oracles -------------------------------------------------------------


def rho2_by_contraction(params) -> np.ndarray:
    """rho_2 from a single contraction of the full amplitude network."""
    a, meas, fb = params.a_init, params.a_meas, params.a_feedback
    amp = np.einsum("syex,xsz,zr->yser", fb, meas, a)
    dx, n_sigma = a.shape[0], params.n_sigma
    out = np.zeros((dx, n_sigma, dx, n_sigma), dtype=complex)
    out_diag = np.einsum("yser,wser->syw", amp, amp.conj())
    for s in range(n_sigma):
        out[:, s, :, s] = out_diag[s]
    return out.reshape(dx * n_sigma, dx * n_sigma)


def rho3_unreduced(params, a_reset: np.ndarray | None = None) -> np.ndarray:
    """rho_3 keeping the discarded register explicitly.

    The old (x2, sigma2) content is moved by the isometry ``a_reset`` (shape
    (n_R, dx * n_sigma), identity by default) into a register R3, the system
    is re-prepared from ``a_init`` with its purifier r3, the sensor is set
    to 0, and finally r3 and R3 are traced out.
    """
    rho2 = _build(params).rho[2].matrix
    d_old = rho2.shape[0]
    v = np.eye(d_old) if a_reset is None else np.asarray(a_reset, dtype=complex)
    _check_isometry(v, "a_reset")
    moved = v @ rho2 @ v.conj().T
    a = params.a_init
    dx, nr = a.shape
    n_sigma = params.n_sigma
    psi = np.zeros((dx, n_sigma, nr), dtype=complex)
    psi[:, 0, :] = a  # |x3, sigma3 = 0, r3>
    fresh = np.einsum("xsr,ytq->xsrytq", psi, psi.conj())
    full = np.einsum("xsrytq,AB->xsrAytqB", fresh, moved)
    # trace out r3 and R3
    reduced = np.einsum("xsrAytrA->xsyt", full)
    return reduced.reshape(dx * n_sigma, dx * n_sigma)


# --- tables ---------------------------------------------------------------------------


def _entropy_profile(states: QuantumStates, x_names):
    sys = np.array([vn_entropy(partial_trace(r, x_names)) for r in states.rho])
    joint = np.array([vn_entropy(r) for r in states.rho])
    return sys, joint


def table_q1(params: Q1Params) -> LegTable:
    st = build_q1(params)
    direct = leg_differences(*_entropy_profile(st, ("s",)))
    r0, r1, r2 = st.rho[:3]
    s0 = vn_entropy(partial_trace(r0, "s"))
    s1 = vn_entropy(partial_trace(r1, "s"))
    h_sig = shannon_entropy(np.clip(st.hybrid(1).weights, 0.0, None))
    ds1 = s0 - q_cond_entropy(r1, "s", "sigma")
    ds2 = s0 - q_cond_entropy(r2, "s", "sigma")
    info2 = q_mutual_info(r2, "s", "sigma")
    closed = np.array(
        [
            [s1 - s0, -ds1 + h_sig],
            [-ds2 + info2 + s0 - s1, -ds2 + ds1],
            [ds2 - info2, ds2 - h_sig],
            [0.0, 0.0],
        ]
    )
    corrections = np.zeros((4, 2))
    corrections[1, 0] = -2.0 * s1  # sign of the S1(s1) term
    terms = {
        "S0(s0)": s0,
        "S1(s1)": s1,
        "H(sigma1)": h_sig,
        "dS_vol_1": ds1,
        "dS_vol_2": ds2,
        "S2(s2:sigma1)": info2,
    }
    work = [
        ("dS_vol_1", "volume", ds1),
        ("dS_vol_2", "volume", ds2),
        ("H(sigma1)", "landauer", h_sig),
    ]
    return LegTable("q1", direct, closed, terms, corrections, work)


def table_q2(params: Q2Params) -> LegTable:
    """Q2 table. The closed forms include the conditional mutual
    informations C_tau = S_tau(s:t|sigma) and the initial correlation
    I0 = S0(s0:t0) wherever the exact bookkeeping needs them; the
    ``corrections`` attribute isolates those extra terms."""
    st = build_q2(params)
    x = ("s", "t")
    direct = leg_differences(*_entropy_profile(st, x))
    r0, r1, r2 = st.rho[:3]
    sx0 = vn_entropy(partial_trace(r0, x))
    sx1 = vn_entropy(partial_trace(r1, x))
    ss0 = vn_entropy(partial_trace(r0, "s"))
    st0 = vn_entropy(partial_trace(r0, "t"))
    i0 = q_mutual_info(r0, "s", "t")
    h_sig = shannon_entropy(np.clip(st.hybrid(1).weights, 0.0, None))

    def dvol(r):
        return (ss0 - q_cond_entropy(r, "s", "sigma")) + (st0 - q_cond_entropy(r, "t", "sigma"))

    def cmi(r):
        return (
            q_cond_entropy(r, "s", "sigma") + q_cond_entropy(r, "t", "sigma") - q_cond_entropy(r, x, "sigma")
        )

    ds1, ds2 = dvol(r1), dvol(r2)
    c1, c2 = cmi(r1), cmi(r2)
    info2 = q_mutual_info(r2, x, "sigma")
    printed = np.array(
        [
            [sx1 - sx0, -ds1 + h_sig],
            [-ds2 + info2 + i0 + sx0 - sx1, -ds2 + ds1 + i0],
            [ds2 - info2 - i0, ds2 - h_sig - i0],
            [0.0, 0.0],
        ]
    )
    corrections = np.array(
        [
            [0.0, i0 - c1],
            [-c2, c1 - c2 - i0],
            [c2, c2],
            [0.0, 0.0],
        ]
    )
    terms = {
        "S0(x0)": sx0,
        "S1(x1)": sx1,
        "S0(s0:t0)": i0,
        "H(sigma1)": h_sig,
        "dS_vol_x_1": ds1,
        "dS_vol_x_2": ds2,
        "S2(x2:sigma1)": info2,
        "S1(s1:t1|sigma1)": c1,
        "S2(s2:t2|sigma1)": c2,
    }
    work = [
        ("dS_vol_x_1", "volume", ds1),
        ("dS_vol_x_2", "volume", ds2),
        ("H(sigma1)", "landauer", h_sig),
        ("S0(s0:t0)", "correlation", i0),
    ]
    return LegTable("q2", direct, printed + corrections, terms, corrections, work)


# --- classical embeddings and random instances ------------------------------------------


def embed_c1(params: C1Params) -> Q1Params:
    """Q1 tensors reproducing a C1 net: purified P(s0), a copying measurement
    with amplitudes sqrt(P(sigma|s0)), and feedback that records (s1, s2) in
    the environment so that the kernel P(s2|sigma) acts classically."""
    ns, nsig = params.n_s, params.n_sigma
    a_init = np.diag(np.sqrt(params.p_s0))
    meas = np.zeros((ns, nsig, ns))
    for s in range(ns):
        meas[s, :, s] = np.sqrt(params.p_sigma1_given_s0[:, s])
    fb = np.zeros((nsig, ns, ns * ns, ns))
    for sig in range(nsig):
        for s1 in range(ns):
            for s2 in range(ns):
                fb[sig, s2, s1 * ns + s2, s1] = math.sqrt(params.p_s2_given_sigma1[s2, sig])
    return Q1Params(a_init, meas, fb)


def embed_c2(params: C2Params) -> Q2Params:
    """Q2 tensors reproducing a C2 net (see :func:`embed_c1`)."""
    ns, nt, nsig = params.n_s, params.n_t, params.n_sigma
    dx = ns * nt
    a_init = np.diag(np.sqrt(params.p_s0t0.ravel())).reshape(ns, nt, dx)
    meas = np.zeros((ns, nt, nsig, ns, nt))
    for s in range(ns):
        for t in range(nt):
            meas[s, t, :, s, t] = np.sqrt(params.p_sigma1_given_s0[:, s])
    fb = np.zeros((nsig, ns, nt, dx * dx, ns, nt))
    for sig in range(nsig):
        for x1 in range(dx):
            s1, t1 = divmod(x1, nt)
            for x2 in range(dx):
                s2, t2 = divmod(x2, nt)
                amp = math.sqrt(params.p_s2_given_sigma1[s2, sig] * params.p_t2_given_sigma1[t2, sig])
                fb[sig, s2, t2, x1 * dx + x2, s1, t1] = amp
    return Q2Params(a_init, meas, fb)


def random_q1_params(rng: np.random.Generator, n_s: int = 2, n_sigma: int = 2, n_r: int | None = None) -> Q1Params:
    """Random pure purification, Haar isometric measurement and Haar
    unitary feedback per sensor value."""
    n_r = n_s if n_r is None else n_r
    a = random_pure_amplitudes((n_s, n_r), rng)
    meas = random_isometry(n_s * n_sigma, n_s, rng).reshape(n_s, n_sigma, n_s)
    fb = np.stack([random_unitary(n_s, rng) for _ in range(n_sigma)])
    return Q1Params(a, meas, fb)


def random_q2_params(
    rng: np.random.Generator, n_s: int = 2, n_t: int = 2, n_sigma: int = 2, n_r: int | None = None
) -> Q2Params:
    dx = n_s * n_t
    n_r = dx if n_r is None else n_r
    a = random_pure_amplitudes((n_s, n_t, n_r), rng)
    meas = random_isometry(dx * n_sigma, dx, rng).reshape(n_s, n_t, n_sigma, n_s, n_t)
    fb = np.stack([random_unitary(dx, rng).reshape(n_s, n_t, n_s, n_t) for _ in range(n_sigma)])
    return Q2Params(a, meas, fb)
