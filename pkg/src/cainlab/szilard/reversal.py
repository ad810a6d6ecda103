"""Time reversal of the one-particle classical engine (tau = 0, 1, 2)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..cbnet import MarkovChainSpec, StructuredChainSpec, reverse_chain
from .classical import C1Params


def c1_chain(params: C1Params, thermal=("s", "sigma")) -> StructuredChainSpec:
    """Measurement and feedback legs of C1 as a chain on a = (s, sigma).

    Step 0 copies s and samples sigma from P(sigma|s); step 1 copies sigma
    and samples s from P(s|sigma). ``thermal`` selects the Theta sub-axes
    used by :func:`cainlab.cbnet.sigma_hat`.
    """
    ns, nsig = params.n_s, params.n_sigma
    init = np.zeros((ns, nsig))
    init[:, 0] = params.p_s0
    meas = np.einsum("ca,da,b->cdab", np.eye(ns), params.p_sigma1_given_s0, np.ones(nsig))
    fb = np.einsum("ed,fd,c->efcd", params.p_s2_given_sigma1, np.eye(nsig), np.ones(ns))
    d = ns * nsig
    chain = MarkovChainSpec(init.ravel(), (meas.reshape(d, d), fb.reshape(d, d)))
    io = ((("s",), ("s", "sigma")), (("sigma",), ("s", "sigma")))
    return StructuredChainSpec(chain, (("s", ns), ("sigma", nsig)), tuple(thermal), io)


def c1_reversed_closed_form(params: C1Params):
    """Reversed initial distribution and kernels in closed form.

    Returns ``(p2, k21, k10)`` with ``p2[s2, sigma2]``,
    ``k21[s1, sigma1, s2, sigma2] = P(X1 | X2)`` and
    ``k10[s0, sigma0, s1, sigma1] = P(X0 | X1)``.
    """
    p = params.p_s0
    meas, fb = params.p_sigma1_given_s0, params.p_s2_given_sigma1
    ns, nsig = params.n_s, params.n_sigma
    p_sig = meas @ p
    p2 = fb * p_sig[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        post = (meas * p[None, :]) / p_sig[:, None]  # post[sigma, s1] = P(s1 | sigma)
    k21 = np.einsum("bd,da,c->adcb", np.eye(nsig), post, np.ones(ns))
    e0 = np.zeros(nsig)
    e0[0] = 1.0
    k10 = np.einsum("ac,b,d->abcd", np.eye(ns), e0, np.ones(nsig))
    return p2, k21, k10


@dataclass(frozen=True)
class ReversalCheck:
    max_abs_error: float
    flagged: tuple  # (reversed step, composite column) pairs excluded

    def to_dict(self) -> dict:
        return {"max_abs_error": self.max_abs_error, "flagged": [list(f) for f in self.flagged]}


def c1_time_reversal_crosscheck(params: C1Params) -> ReversalCheck:
    """Compare the generic Bayes-inverted reversal of the C1 chain with the
    closed-form reversed kernels; flagged (zero-support) columns are skipped."""
    spec = c1_chain(params)
    rev = reverse_chain(spec.chain, warn=False)
    ns, nsig = params.n_s, params.n_sigma
    d = ns * nsig
    p2, k21, k10 = c1_reversed_closed_form(params)
    err = float(np.max(np.abs(rev.initial - p2.ravel())))
    for j, closed in enumerate((k21.reshape(d, d), k10.reshape(d, d))):
        bad = {c for (step, c) in rev.flagged if step == j}
        cols = [c for c in range(d) if c not in bad]
        if cols:
            err = max(err, float(np.max(np.abs(rev.steps[j][:, cols] - closed[:, cols]))))
    return ReversalCheck(err, rev.flagged)
