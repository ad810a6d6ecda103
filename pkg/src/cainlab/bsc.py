"""Binary-symmetric-channel algebra and the closed-form C1 table it yields.

Conventions: ``v(l) = (l, 1 - l)``, ``M(a) = [[a, 1 - a], [1 - a, a]]`` is
column-stochastic, and the symmetric product is ``a * b = ab + (1-a)(1-b)``.
"""
from __future__ import annotations

import math

import numpy as np

from .info import TransitionMatrix
from .szilard.classical import C1Params, table_c1
from .szilard.table import LegTable


def _unit(a: float, name: str = "argument") -> float:
    a = float(a)
    if not (0.0 <= a <= 1.0):
        raise ValueError(f"{name} must lie in [0, 1], got {a!r}")
    return a


def complement(a: float) -> float:
    return 1.0 - _unit(a)


def sym_product(a: float, b: float) -> float:
    """Symmetric product ``a b + (1 - a)(1 - b)``."""
    a, b = _unit(a), _unit(b)
    return a * b + (1.0 - a) * (1.0 - b)


def m_matrix(a: float) -> np.ndarray:
    a = _unit(a)
    return TransitionMatrix(np.array([[a, 1.0 - a], [1.0 - a, a]])).matrix


def v_vector(l: float) -> np.ndarray:
    l = _unit(l)
    return np.array([l, 1.0 - l])


def binary_entropy(a: float) -> float:
    """h(a) in nats, with h(0) = h(1) = 0."""
    a = _unit(a)
    return -sum(p * math.log(p) for p in (a, 1.0 - a) if p > 0.0)


def h_monotone_check(a: float, l: float) -> float:
    """Slack of h(a * l) >= h(l)."""
    return binary_entropy(sym_product(a, l)) - binary_entropy(l)


def c1_params_bsc(l: float, a: float, b: float) -> C1Params:
    """C1 with P(s0) = v(l), P(sigma1|s0) = M(a), P(s2|sigma1) = M(b)."""
    return C1Params(v_vector(l), m_matrix(a), m_matrix(b))


def c1_bsc_closed_forms(l: float, a: float, b: float) -> np.ndarray:
    """The 4x2 C1 table written with binary entropies only."""
    h = binary_entropy
    al = sym_product(a, l)
    bal = sym_product(b, al)
    return np.array(
        [
            [0.0, h(a)],
            [h(bal) - h(l), h(b) + h(al) - h(a) - h(l)],
            [-h(bal) + h(l), -h(b) - h(al) + h(l)],
            [0.0, 0.0],
        ]
    )


def c1_bsc_table(l: float, a: float, b: float) -> LegTable:
    """LegTable whose closed forms are the binary-entropy expressions and
    whose direct values come from the generic C1 joint."""
    generic = table_c1(c1_params_bsc(l, a, b))
    closed = c1_bsc_closed_forms(l, a, b)
    terms = dict(generic.terms)
    terms.update({"h(l)": binary_entropy(l), "h(alpha)": binary_entropy(a), "h(beta)": binary_entropy(b)})
    return LegTable("c1-bsc", generic.direct, closed, terms, None, list(generic.work_terms))
