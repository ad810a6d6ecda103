"""Classical Szilard engines: one particle (C1) and two particles (C2).

Time slices are tau = 0 (prepared), 1 (measured), 2 (after feedback),
3 (system re-initialized, sensor erased).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..info import JointDist, ProbVec, TransitionMatrix, cond_entropy, mutual_info
from ..sampling import random_probs, random_stochastic
from .table import LegTable, leg_differences

C1_AXES = ("s0", "sigma0", "s1", "sigma1", "s2", "sigma2", "s3", "sigma3")
C2_AXES = tuple(f"{v}{k}" for k in range(4) for v in ("s", "t", "sigma"))


def _onehot(n: int) -> np.ndarray:
    e = np.zeros(n)
    e[0] = 1.0
    return e


@dataclass(frozen=True)
class C1Params:
    """P(s0), sensor kernel P(sigma1|s0) and feedback kernel P(s2|sigma1)."""

    p_s0: np.ndarray
    p_sigma1_given_s0: np.ndarray
    p_s2_given_sigma1: np.ndarray

    def __post_init__(self):
        p = ProbVec(self.p_s0).probs
        meas = TransitionMatrix(self.p_sigma1_given_s0).matrix
        fb = TransitionMatrix(self.p_s2_given_sigma1).matrix
        if meas.shape[1] != p.size or fb.shape != (p.size, meas.shape[0]):
            raise ValueError(
                f"inconsistent dimensions: p_s0 {p.size}, sensor {meas.shape}, feedback {fb.shape}"
            )
        object.__setattr__(self, "p_s0", p)
        object.__setattr__(self, "p_sigma1_given_s0", meas)
        object.__setattr__(self, "p_s2_given_sigma1", fb)

    @property
    def n_s(self) -> int:
        return self.p_s0.size

    @property
    def n_sigma(self) -> int:
        return self.p_sigma1_given_s0.shape[0]

    def to_dict(self) -> dict:
        return {
            "case": "c1",
            "p_s0": self.p_s0.tolist(),
            "p_sigma1_given_s0": self.p_sigma1_given_s0.tolist(),
            "p_s2_given_sigma1": self.p_s2_given_sigma1.tolist(),
        }


@dataclass(frozen=True)
class C2Params:
    """Joint P(s0, t0), sensor kernel on s0, feedback kernels for s and t."""

    p_s0t0: np.ndarray
    p_sigma1_given_s0: np.ndarray
    p_s2_given_sigma1: np.ndarray
    p_t2_given_sigma1: np.ndarray

    def __post_init__(self):
        pst = np.asarray(self.p_s0t0, dtype=float)
        pst = JointDist(pst, ("s0", "t0")).table
        meas = TransitionMatrix(self.p_sigma1_given_s0).matrix
        fs = TransitionMatrix(self.p_s2_given_sigma1).matrix
        ft = TransitionMatrix(self.p_t2_given_sigma1).matrix
        ns, nt = pst.shape
        nsig = meas.shape[0]
        if meas.shape[1] != ns or fs.shape != (ns, nsig) or ft.shape != (nt, nsig):
            raise ValueError("inconsistent C2 dimensions")
        object.__setattr__(self, "p_s0t0", pst)
        object.__setattr__(self, "p_sigma1_given_s0", meas)
        object.__setattr__(self, "p_s2_given_sigma1", fs)
        object.__setattr__(self, "p_t2_given_sigma1", ft)

    @property
    def n_s(self) -> int:
        return self.p_s0t0.shape[0]

    @property
    def n_t(self) -> int:
        return self.p_s0t0.shape[1]

    @property
    def n_sigma(self) -> int:
        return self.p_sigma1_given_s0.shape[0]

    def to_dict(self) -> dict:
        return {
            "case": "c2",
            "p_s0t0": self.p_s0t0.tolist(),
            "p_sigma1_given_s0": self.p_sigma1_given_s0.tolist(),
            "p_s2_given_sigma1": self.p_s2_given_sigma1.tolist(),
            "p_t2_given_sigma1": self.p_t2_given_sigma1.tolist(),
        }


def build_c1(params: C1Params) -> JointDist:
    """Joint over s0, sigma0, ..., s3, sigma3.

    sigma0 = 0, s1 copies s0, sigma1 ~ P(.|s0), s2 ~ P(.|sigma1),
    sigma2 copies sigma1, s3 is freshly drawn from P(s0) and sigma3 = 0.
    """
    p = params.p_s0
    e0 = _onehot(params.n_sigma)
    t = np.einsum(
        "a,b,ca,da,ed,fd,g,h->abcdefgh",
        p,
        e0,
        np.eye(params.n_s),
        params.p_sigma1_given_s0,
        params.p_s2_given_sigma1,
        np.eye(params.n_sigma),
        p,
        e0,
    )
    return JointDist(t, C1_AXES)


def build_c2(params: C2Params) -> JointDist:
    """Joint over (s, t, sigma) at tau = 0..3; the sensor reads s0 only and
    the feedback resets s and t independently given sigma1."""
    e0 = _onehot(params.n_sigma)
    t = np.einsum(
        "ab,c,da,eb,fa,gf,hf,if,jk,l->abcdefghijkl",
        params.p_s0t0,
        e0,
        np.eye(params.n_s),
        np.eye(params.n_t),
        params.p_sigma1_given_s0,
        params.p_s2_given_sigma1,
        params.p_t2_given_sigma1,
        np.eye(params.n_sigma),
        params.p_s0t0,
        e0,
    )
    return JointDist(t, C2_AXES)


def _time_entropies(j: JointDist, system_vars, sensor="sigma"):
    sys = [j.entropy(tuple(f"{v}{k}" for v in system_vars)) for k in range(4)]
    joint = [j.entropy(tuple(f"{v}{k}" for v in system_vars) + (f"{sensor}{k}",)) for k in range(4)]
    return np.array(sys), np.array(joint)


def table_c1(params: C1Params) -> LegTable:
    j = build_c1(params)
    direct = leg_differences(*_time_entropies(j, ("s",)))
    h_sig = j.entropy("sigma1")
    info_meas = mutual_info(j, "sigma1", "s0")
    info_fb = mutual_info(j, "s2", "sigma1")
    dh_vol = j.entropy("s0") - cond_entropy(j, "s2", "sigma1")
    closed = np.array(
        [
            [0.0, -info_meas + h_sig],
            [-dh_vol + info_fb, -dh_vol + info_meas],
            [dh_vol - info_fb, dh_vol - h_sig],
            [0.0, 0.0],
        ]
    )
    terms = {
        "H(s0)": j.entropy("s0"),
        "H(sigma1)": h_sig,
        "H(sigma1:s0)": info_meas,
        "H(s2:sigma1)": info_fb,
        "H(s2|sigma1)": cond_entropy(j, "s2", "sigma1"),
        "dH_vol": dh_vol,
    }
    work = [
        ("dH_vol", "volume", dh_vol),
        ("H(sigma1)", "landauer", h_sig),
        ("H(sigma1:s0)", "correlation", info_meas),
    ]
    return LegTable("c1", direct, closed, terms, None, work)


def table_c2(params: C2Params) -> LegTable:
    j = build_c2(params)
    direct = leg_differences(*_time_entropies(j, ("s", "t")))
    h_sig = j.entropy("sigma1")
    info_meas = mutual_info(j, "sigma1", "s0")
    info_fb = mutual_info(j, ("s2", "t2"), "sigma1")
    corr = mutual_info(j, "s0", "t0")
    dh_s = j.entropy("s0") - cond_entropy(j, "s2", "sigma1")
    dh_t = j.entropy("t0") - cond_entropy(j, "t2", "sigma1")
    dh_x = dh_s + dh_t
    closed = np.array(
        [
            [0.0, -info_meas + h_sig],
            [-dh_x + info_fb + corr, -dh_x + info_meas + corr],
            [dh_x - info_fb - corr, dh_x - h_sig - corr],
            [0.0, 0.0],
        ]
    )
    terms = {
        "H(s0)": j.entropy("s0"),
        "H(t0)": j.entropy("t0"),
        "H(sigma1)": h_sig,
        "H(sigma1:s0)": info_meas,
        "H(x2:sigma1)": info_fb,
        "H(s0:t0)": corr,
        "dH_vol_s": dh_s,
        "dH_vol_t": dh_t,
        "dH_vol_x": dh_x,
    }
    work = [
        ("dH_vol_s", "volume", dh_s),
        ("dH_vol_t", "volume", dh_t),
        ("dH_vol_x", "volume", dh_x),
        ("H(sigma1)", "landauer", h_sig),
        ("H(s0:t0)", "correlation", corr),
        ("H(sigma1:s0)", "correlation", info_meas),
    ]
    return LegTable("c2", direct, closed, terms, None, work)


def random_c1_params(rng: np.random.Generator, n_s: int = 2, n_sigma: int = 2) -> C1Params:
    return C1Params(
        random_probs(n_s, rng),
        random_stochastic(n_sigma, n_s, rng),
        random_stochastic(n_s, n_sigma, rng),
    )


def random_c2_params(rng: np.random.Generator, n_s: int = 2, n_t: int = 2, n_sigma: int = 2) -> C2Params:
    return C2Params(
        random_probs(n_s * n_t, rng).reshape(n_s, n_t),
        random_stochastic(n_sigma, n_s, rng),
        random_stochastic(n_s, n_sigma, rng),
        random_stochastic(n_t, n_sigma, rng),
    )
