"""Markov-chain Bayesian networks, Bayes-inverted time reversal and the
trajectory entropy-production functional ``sigma_hat``.

Transition matrices are column-stochastic: ``step[y, x] = P(a_{k+1}=y | a_k=x)``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .info import JointDist, ProbVec, TransitionMatrix, cond_entropy
from .sampling import random_doubly_stochastic, random_probs, random_stochastic

MAX_STATES = 10**6


class ChainSizeError(ValueError):
    """Trajectory space too large for exact enumeration."""


class UndefinedSigmaError(ValueError):
    """sigma_hat requested on a zero-probability trajectory."""


class ReversalWarning(UserWarning):
    """A reversed kernel column was undefined and filled uniformly."""


@dataclass(frozen=True)
class MarkovChainSpec:
    """Initial distribution plus ordered transition matrices.

    ``flagged`` lists ``(step, column)`` pairs whose entries were filled
    uniformly because Bayes inversion was undefined there.
    """

    initial: np.ndarray
    steps: tuple
    flagged: tuple = ()

    def __post_init__(self):
        init = ProbVec(self.initial).probs
        steps = tuple(TransitionMatrix(s).matrix for s in self.steps)
        if not steps:
            raise ValueError("a chain needs at least one step")
        d = init.size
        for k, s in enumerate(steps):
            if s.shape[1] != d:
                raise ValueError(f"step {k} expects {s.shape[1]} input states, got {d}")
            d = s.shape[0]
        object.__setattr__(self, "initial", init)
        object.__setattr__(self, "steps", steps)
        object.__setattr__(self, "flagged", tuple(self.flagged))

    @property
    def horizon(self) -> int:
        return len(self.steps)

    @property
    def dims(self) -> tuple[int, ...]:
        return (self.initial.size,) + tuple(s.shape[0] for s in self.steps)

    def marginals(self) -> list[np.ndarray]:
        out = [self.initial]
        for s in self.steps:
            out.append(s @ out[-1])
        return out

    def to_dict(self) -> dict:
        return {
            "initial": self.initial.tolist(),
            "steps": [s.tolist() for s in self.steps],
            "flagged": [list(f) for f in self.flagged],
        }


@dataclass(frozen=True)
class StructuredChainSpec:
    """Chain whose composite state is a tuple of named sub-axes.

    Parameters
    ----------
    chain : MarkovChainSpec
        Chain on the composite index (C-order ravel of ``sub_axes``); every
        time slice must have the same composite dimension.
    sub_axes : sequence of (name, dim)
    thermal : sequence of str
        Sub-axes playing the role of Theta; the rest form X.
    step_io : optional
        Per-step ``(reads, writes)`` sub-axis names, informational only.
    """

    chain: MarkovChainSpec
    sub_axes: tuple
    thermal: tuple
    step_io: tuple | None = None

    def __post_init__(self):
        axes = tuple((str(n), int(d)) for n, d in self.sub_axes)
        object.__setattr__(self, "sub_axes", axes)
        object.__setattr__(self, "thermal", tuple(self.thermal))
        size = math.prod(d for _, d in axes)
        if any(d != size for d in self.chain.dims):
            raise ValueError(f"composite dimension {size} does not match chain dims {self.chain.dims}")
        names = [n for n, _ in axes]
        unknown = set(self.thermal) - set(names)
        if unknown:
            raise ValueError(f"unknown thermal sub-axes {sorted(unknown)}")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.sub_axes)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(d for _, d in self.sub_axes)

    @property
    def non_thermal(self) -> tuple[str, ...]:
        return tuple(n for n in self.names if n not in self.thermal)


@dataclass(frozen=True)
class Trajectory:
    values: tuple
    weight: float


@dataclass
class SigmaHatReport:
    mode: str
    mean_sigma: float
    mean_exp_neg_sigma: float
    stderr_sigma: float = 0.0
    stderr_exp_neg_sigma: float = 0.0
    n_samples: int | None = None
    per_trajectory: list | None = field(default=None, repr=False)

    @property
    def exp_deviation(self) -> float:
        """Deviation of the exponential average from one (reported only)."""
        return self.mean_exp_neg_sigma - 1.0

    def to_dict(self) -> dict:
        d = {
            "mode": self.mode,
            "mean_sigma": self.mean_sigma,
            "mean_exp_neg_sigma": self.mean_exp_neg_sigma,
            "exp_deviation": self.exp_deviation,
            "stderr_sigma": self.stderr_sigma,
            "stderr_exp_neg_sigma": self.stderr_exp_neg_sigma,
            "n_samples": self.n_samples,
        }
        if self.per_trajectory is not None:
            d["per_trajectory"] = [
                {"values": list(t.values), "weight": t.weight, "sigma": s} for t, s in self.per_trajectory
            ]
        return d


# ---------------------------------------------------------------------------
# joints


def _check_size(dims: Sequence[int]) -> None:
    n = math.prod(dims)
    if n > MAX_STATES:
        raise ChainSizeError(f"{n} trajectories exceeds the exact-enumeration limit {MAX_STATES}")


def path_tensor(initial: np.ndarray, steps: Sequence[np.ndarray]) -> np.ndarray:
    """Array ``t[a0, ..., a_tau] = initial[a0] * prod_k steps[k][a_{k+1}, a_k]``."""
    t = np.asarray(initial, dtype=float)
    for s in steps:
        t = t[..., None] * s.T
    return t


def chain_joint(spec: MarkovChainSpec) -> JointDist:
    """Joint distribution of a_0..a_tau with axes ``a0``..``a{tau}``."""
    _check_size(spec.dims)
    t = path_tensor(spec.initial, spec.steps)
    return JointDist(t, tuple(f"a{k}" for k in range(spec.horizon + 1)))


def structured_joint(spec: StructuredChainSpec) -> JointDist:
    """Chain joint with each time slice split into its named sub-axes,
    e.g. axes ``s0, sigma0, s1, sigma1, ...``."""
    c = spec.chain
    _check_size(c.dims)
    t = path_tensor(c.initial, c.steps).reshape(spec.shape * (c.horizon + 1))
    axes = tuple(f"{n}{k}" for k in range(c.horizon + 1) for n in spec.names)
    return JointDist(t, axes)


# ---------------------------------------------------------------------------
# reversal


def reverse_chain(spec: MarkovChainSpec, warn: bool = True) -> MarkovChainSpec:
    """Bayes-inverted reversed chain.

    The reversed chain starts from P(a_tau) and its k-th step is
    ``P(a_{tau-k-1} | a_{tau-k}) = P(a_{tau-k} | a_{tau-k-1}) P(a_{tau-k-1}) / P(a_{tau-k})``.
    Columns conditioned on a zero-probability state are undefined; they are
    filled uniformly, listed in ``flagged`` and announced by a
    :class:`ReversalWarning`.
    """
    marg = spec.marginals()
    rev_steps, flagged = [], []
    tau = spec.horizon
    for j, k in enumerate(range(tau - 1, -1, -1)):
        fwd = spec.steps[k]
        joint = fwd * marg[k][None, :]  # joint[y, x] = P(a_{k+1}=y, a_k=x)
        prior = joint.sum(axis=1)
        r = np.empty((fwd.shape[1], fwd.shape[0]))
        for y in range(fwd.shape[0]):
            if prior[y] > 0.0:
                col = joint[y] / prior[y]
                r[:, y] = col / col.sum()
            else:
                r[:, y] = 1.0 / fwd.shape[1]
                flagged.append((j, y))
        rev_steps.append(r)
    if flagged and warn:
        warnings.warn(
            ReversalWarning(f"undefined reversed columns filled uniformly: {flagged}"),
            stacklevel=2,
        )
    return MarkovChainSpec(marg[-1], tuple(rev_steps), tuple(flagged))


def ratio_identity_check(spec: MarkovChainSpec) -> float:
    """Max over positive trajectories of
    ``|P(a0)/P(a_tau) - P_rev(path | a_tau) / P_fwd(path | a0)|``."""
    _check_size(spec.dims)
    rev = reverse_chain(spec, warn=False)
    joint = path_tensor(spec.initial, spec.steps)
    fwd_cond = path_tensor(np.ones(spec.dims[0]), spec.steps)
    rev_cond = path_tensor(np.ones(rev.dims[0]), rev.steps)
    rev_cond = np.transpose(rev_cond, tuple(range(spec.horizon, -1, -1)))
    shape = joint.shape
    p0 = spec.initial.reshape((-1,) + (1,) * spec.horizon)
    pt = spec.marginals()[-1].reshape((1,) * spec.horizon + (-1,))
    pos = joint > 0
    lhs = np.broadcast_to(p0, shape)[pos] / np.broadcast_to(pt, shape)[pos]
    rhs = rev_cond[pos] / fwd_cond[pos]
    return float(np.max(np.abs(lhs - rhs))) if lhs.size else 0.0


def joint_reversal_error(spec: MarkovChainSpec) -> float:
    """Max deviation between the reversed chain's joint (time-flipped) and
    the forward joint."""
    rev = reverse_chain(spec, warn=False)
    fwd = path_tensor(spec.initial, spec.steps)
    back = path_tensor(rev.initial, rev.steps)
    back = np.transpose(back, tuple(range(spec.horizon, -1, -1)))
    return float(np.max(np.abs(fwd - back)))


def double_reversal_error(spec: MarkovChainSpec) -> float:
    """Max deviation of reverse(reverse(spec))'s joint from the forward joint."""
    twice = reverse_chain(reverse_chain(spec, warn=False), warn=False)
    return float(
        np.max(np.abs(path_tensor(spec.initial, spec.steps) - path_tensor(twice.initial, twice.steps)))
    )


# ---------------------------------------------------------------------------
# sigma_hat


def _x_marginal(tensor: np.ndarray, spec: StructuredChainSpec) -> np.ndarray:
    """Sum out thermal sub-axes at every time; keeps singleton dims so the
    result broadcasts against the full sub-axis tensor."""
    n_sub = len(spec.sub_axes)
    times = tensor.ndim
    t = tensor.reshape(spec.shape * times)
    th = [i for i, n in enumerate(spec.names) if n in spec.thermal]
    axes = tuple(k * n_sub + i for k in range(times) for i in th)
    return t.sum(axis=axes, keepdims=True) if axes else t


def _time_marginal(x_path: np.ndarray, time: int, n_sub: int) -> np.ndarray:
    """Marginal of the X path tensor at one time, broadcastable."""
    times = x_path.ndim // n_sub
    keep = set(range(time * n_sub, (time + 1) * n_sub))
    axes = tuple(i for i in range(times * n_sub) if i not in keep)
    return x_path.sum(axis=axes, keepdims=True)


def sigma_hat_table(spec: StructuredChainSpec) -> tuple[np.ndarray, np.ndarray]:
    """Forward path probabilities and sigma_hat on every trajectory.

    Returns arrays over the composite trajectory index ``(a0, ..., a_tau)``;
    sigma_hat is NaN where the forward probability vanishes.

    sigma_hat = ln[P_rev(path | a_tau) / P_fwd(path | a0)]
              + ln[P_fwd(X path | X0) / P_rev(X path | X_tau)]
    where the X-path probabilities are marginals of the respective joints.
    """
    c = spec.chain
    _check_size(c.dims)
    tau = c.horizon
    flip = tuple(range(tau, -1, -1))
    rev = reverse_chain(c, warn=False)
    fwd_joint = path_tensor(c.initial, c.steps)
    fwd_cond = path_tensor(np.ones(c.dims[0]), c.steps)
    rev_cond = np.transpose(path_tensor(np.ones(rev.dims[0]), rev.steps), flip)
    rev_joint = np.transpose(path_tensor(rev.initial, rev.steps), flip)

    n_sub = len(spec.sub_axes)
    full = spec.shape * (tau + 1)
    fx = _x_marginal(fwd_joint, spec)
    rx = _x_marginal(rev_joint, spec)
    with np.errstate(divide="ignore", invalid="ignore"):
        fx_cond = fx / _time_marginal(fx, 0, n_sub)
        rx_cond = rx / _time_marginal(rx, tau, n_sub)
        sig = (
            np.log(rev_cond.reshape(full))
            - np.log(fwd_cond.reshape(full))
            + np.log(np.broadcast_to(fx_cond, full))
            - np.log(np.broadcast_to(rx_cond, full))
        )
    weights = fwd_joint.reshape(full)
    sig = np.where(weights > 0, sig, np.nan)
    d = math.prod(spec.shape)
    return fwd_joint, sig.reshape((d,) * (tau + 1))


def sigma_hat(spec: StructuredChainSpec, trajectory) -> float:
    """sigma_hat on one trajectory of composite state indices."""
    values = trajectory.values if isinstance(trajectory, Trajectory) else tuple(trajectory)
    weights, sig = sigma_hat_table(spec)
    if len(values) != weights.ndim:
        raise ValueError(f"trajectory length {len(values)} != horizon + 1 = {weights.ndim}")
    if weights[values] <= 0.0:
        raise UndefinedSigmaError(f"trajectory {values} has zero probability")
    return float(sig[values])


def conditional_entropy_change(spec: StructuredChainSpec) -> float:
    """H(Theta_tau | X_tau) - H(Theta_0 | X_0) evaluated from the joint."""
    j = structured_joint(spec)
    tau = spec.chain.horizon

    def at(k):
        th = tuple(f"{n}{k}" for n in spec.thermal)
        x = tuple(f"{n}{k}" for n in spec.non_thermal)
        return cond_entropy(j, th, x)

    return at(tau) - at(0)


def estimate_sigma(
    spec: StructuredChainSpec,
    mode: str = "exact",
    n_samples: int | None = None,
    seed: int | None = None,
    keep_trajectories: bool = False,
) -> SigmaHatReport:
    """Average sigma_hat and exp(-sigma_hat) over forward trajectories.

    ``mode="exact"`` enumerates every positive trajectory with compensated
    summation; ``mode="mc"`` samples ``n_samples`` trajectories from a
    generator seeded with ``seed`` and reports means with standard errors.
    """
    weights, sig = sigma_hat_table(spec)
    if mode == "exact":
        pos = np.argwhere(weights > 0)
        w = weights[weights > 0]
        s = sig[weights > 0]
        per = None
        if keep_trajectories:
            per = [(Trajectory(tuple(int(v) for v in idx), float(wi)), float(si)) for idx, wi, si in zip(pos, w, s)]
        return SigmaHatReport(
            "exact",
            math.fsum(w * s),
            math.fsum(w * np.exp(-s)),
            per_trajectory=per,
        )
    if mode != "mc":
        raise ValueError(f"unknown mode {mode!r}; use 'exact' or 'mc'")
    if seed is None or n_samples is None or n_samples < 2:
        raise ValueError("Monte Carlo mode needs a seed and n_samples >= 2")
    rng = np.random.default_rng(seed)
    paths = sample_trajectories(spec.chain, n_samples, rng)
    s = sig[tuple(paths.T)]
    e = np.exp(-s)
    root_n = math.sqrt(n_samples)
    return SigmaHatReport(
        "mc",
        float(s.mean()),
        float(e.mean()),
        float(s.std(ddof=1) / root_n),
        float(e.std(ddof=1) / root_n),
        n_samples,
    )


def sample_trajectories(spec: MarkovChainSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``n`` forward trajectories; returns an (n, tau + 1) index array."""
    out = np.empty((n, spec.horizon + 1), dtype=np.int64)
    cdf0 = np.cumsum(spec.initial)
    out[:, 0] = np.minimum(np.searchsorted(cdf0, rng.random(n), side="right"), cdf0.size - 1)
    for k, s in enumerate(spec.steps):
        cdf = np.cumsum(s, axis=0)[:, out[:, k]]  # (n_out, n)
        u = rng.random(n)
        out[:, k + 1] = np.minimum((u[None, :] >= cdf).sum(axis=0), s.shape[0] - 1)
    return out


# ---------------------------------------------------------------------------
# random chains


def random_chain(dim: int, horizon: int, rng: np.random.Generator) -> MarkovChainSpec:
    """Flat-Dirichlet initial distribution and transition columns."""
    return MarkovChainSpec(
        random_probs(dim, rng), tuple(random_stochastic(dim, dim, rng) for _ in range(horizon))
    )


def random_cain_chain(
    theta_dim: int, x_dim: int, horizon: int, rng: np.random.Generator
) -> StructuredChainSpec:
    """Chain on (x, theta) with kernel Q(x'|x) D_x(theta'|theta).

    Each D_x is doubly stochastic (Sinkhorn), so H(Theta|X) cannot decrease
    along the chain.
    """
    d = theta_dim * x_dim
    steps = []
    for _ in range(horizon):
        q = random_stochastic(x_dim, x_dim, rng)
        blocks = [random_doubly_stochastic(theta_dim, rng) for _ in range(x_dim)]
        k = np.zeros((x_dim, theta_dim, x_dim, theta_dim))
        for x in range(x_dim):
            k[:, :, x, :] = q[:, x][:, None, None] * blocks[x][None, :, :]
        steps.append(k.reshape(d, d))
    chain = MarkovChainSpec(random_probs(d, rng), tuple(steps))
    return StructuredChainSpec(chain, (("x", x_dim), ("theta", theta_dim)), ("theta",))
