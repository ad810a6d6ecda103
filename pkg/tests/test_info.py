import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cainlab.info import (
    INF,
    DensityMatrix,
    FactorError,
    InvalidDistributionError,
    JointDist,
    ProbVec,
    TransitionMatrix,
    classicalize,
    cond_entropy,
    diagonal_state,
    kl_divergence,
    kron_states,
    mutual_info,
    partial_trace,
    q_cond_entropy,
    q_mutual_info,
    q_relative_entropy,
    shannon_entropy,
    vn_entropy,
)
from cainlab.sampling import random_density_matrix

LN2 = math.log(2)


def h2(a):
    """Hand-coded binary entropy used as an oracle."""
    return -sum(x * math.log(x) for x in (a, 1 - a) if x > 0)


def bell():
    psi = np.array([1, 0, 0, 1]) / math.sqrt(2)
    return DensityMatrix(np.outer(psi, psi), (("A", 2), ("B", 2)))


# --- shannon / classical ------------------------------------------------------


def test_shannon_examples():
    assert shannon_entropy([1, 0]) == 0.0
    assert shannon_entropy(ProbVec([0.5, 0.5])) == pytest.approx(LN2, abs=1e-15)
    # frozen: -(0.7311 ln 0.7311 + 0.2689 ln 0.2689)
    assert shannon_entropy([0.7311, 0.2689]) == pytest.approx(0.5823, abs=1e-3)


def test_invalid_distributions_rejected():
    with pytest.raises(InvalidDistributionError):
        ProbVec([0.6, 0.6])
    with pytest.raises(InvalidDistributionError):
        shannon_entropy([1.2, -0.2])
    with pytest.raises(InvalidDistributionError):
        TransitionMatrix([[0.5, 0.2], [0.4, 0.8]])


def test_transition_matrix_doubly_stochastic_flag():
    assert TransitionMatrix([[0.7, 0.3], [0.3, 0.7]]).doubly_stochastic
    assert not TransitionMatrix([[0.9, 0.3], [0.1, 0.7]]).doubly_stochastic


def test_cond_entropy_and_mutual_info_examples():
    indep = JointDist(np.full((2, 2), 0.25), ("a", "b"))
    assert cond_entropy(indep, "a", "b") == pytest.approx(LN2)
    assert mutual_info(indep, "a", "b") == pytest.approx(0.0, abs=1e-15)
    copy = JointDist(np.diag([0.5, 0.5]), ("a", "b"))
    assert cond_entropy(copy, "a", "b") == pytest.approx(0.0, abs=1e-15)
    assert mutual_info(copy, "a", "b") == pytest.approx(LN2)
    # sensor reading a fair bit through a channel with fidelity 0.8
    chan = np.array([[0.8, 0.2], [0.2, 0.8]])
    j = JointDist(chan * 0.5, ("sigma1", "s0"))
    assert cond_entropy(j, "sigma1", "s0") == pytest.approx(h2(0.8), abs=1e-14)
    assert mutual_info(j, "sigma1", "s0") == pytest.approx(LN2 - h2(0.8), abs=1e-14)


def test_overlapping_axes_rejected():
    j = JointDist(np.full((2, 2), 0.25), ("a", "b"))
    with pytest.raises(FactorError):
        cond_entropy(j, ("a", "b"), "b")
    with pytest.raises(FactorError):
        j.marginal("c")


def test_marginal_order_follows_request():
    rng = np.random.default_rng(1)
    t = rng.random((2, 3, 4))
    j = JointDist(t / t.sum(), ("x", "y", "z"))
    m = j.marginal(("z", "x"))
    np.testing.assert_allclose(m.table, (t / t.sum()).sum(axis=1).T)
    assert m.axes == ("z", "x")


def test_kl_divergence_examples():
    assert kl_divergence([0.5, 0.5], [0.5, 0.5]) == 0.0
    assert kl_divergence([1, 0], [0.5, 0.5]) == pytest.approx(LN2)
    assert kl_divergence([1, 0], [0, 1]) == INF
    with pytest.raises(ValueError):
        kl_divergence([1, 0], [1, 0, 0])


@st.composite
def joint_tables(draw):
    shape = draw(st.tuples(*[st.integers(1, 3)] * 3))
    n = int(np.prod(shape))
    w = draw(st.lists(st.floats(0.0, 1.0), min_size=n, max_size=n))
    w = np.asarray(w) + 1e-3
    return JointDist((w / w.sum()).reshape(shape), ("a", "b", "c"))


@settings(max_examples=60, deadline=None)
@given(joint_tables())
def test_chain_rule_and_nonnegativity(j):
    assert j.entropy(("a", "b")) == pytest.approx(
        j.entropy("b") + cond_entropy(j, "a", "b"), abs=1e-10
    )
    assert cond_entropy(j, "a", ("b", "c")) >= -1e-12
    assert mutual_info(j, "a", ("b", "c")) >= -1e-12
    assert 0.0 <= j.entropy() <= math.log(j.table.size) + 1e-12


# --- quantum -------------------------------------------------------------------


def test_vn_entropy_examples():
    assert vn_entropy(DensityMatrix(np.diag([1.0, 0.0]))) == 0.0
    assert vn_entropy(DensityMatrix(np.eye(2) / 2)) == pytest.approx(LN2)
    assert vn_entropy(DensityMatrix(np.diag([0.7311, 0.2689]))) == pytest.approx(
        0.5823, abs=1e-3
    )
    with pytest.raises(ValueError):
        vn_entropy(np.array([[0.5, 0.3], [0.0, 0.5]]))


def test_density_matrix_validation():
    with pytest.raises(ValueError):
        DensityMatrix(np.diag([0.6, 0.6]))
    with pytest.raises(ValueError):
        DensityMatrix(np.diag([1.2, -0.2]))
    with pytest.raises(FactorError):
        DensityMatrix(np.eye(4) / 4, (("A", 2), ("B", 3)))


def test_q_relative_entropy_examples():
    rng = np.random.default_rng(3)
    rho = random_density_matrix(3, rng)
    assert q_relative_entropy(rho, rho) == pytest.approx(0.0, abs=1e-12)
    p, q = np.array([0.2, 0.5, 0.3]), np.array([0.4, 0.4, 0.2])
    d = q_relative_entropy(DensityMatrix(np.diag(p)), DensityMatrix(np.diag(q)))
    assert d == pytest.approx(kl_divergence(p, q), abs=1e-14)
    pure0 = DensityMatrix(np.diag([1.0, 0.0]))
    pure1 = DensityMatrix(np.diag([0.0, 1.0]))
    assert q_relative_entropy(pure0, pure1) == INF


def _logm_hermitian(m, order):
    # oracle: eigendecomposition with an explicit reordering of eigenpairs
    w, v = np.linalg.eigh(m)
    w, v = w[order], v[:, order]
    return (v * np.log(w)) @ v.conj().T


def test_q_relative_entropy_against_eigendecomposition_oracle():
    rng = np.random.default_rng(7)
    for _ in range(20):
        a = random_density_matrix(3, rng).matrix
        b = random_density_matrix(3, rng).matrix
        la = _logm_hermitian(a, [2, 0, 1])
        lb = _logm_hermitian(b, [1, 2, 0])
        oracle = np.trace(a @ (la - lb)).real
        assert q_relative_entropy(a, b) == pytest.approx(oracle, abs=1e-8)
        assert q_relative_entropy(a, b) >= -1e-10


def test_partial_trace_examples():
    rng = np.random.default_rng(5)
    ra = random_density_matrix(2, rng, name="A")
    rb = random_density_matrix(3, rng, name="B")
    prod = kron_states(ra, rb)
    np.testing.assert_allclose(partial_trace(prod, "A").matrix, ra.matrix, atol=1e-14)
    np.testing.assert_allclose(partial_trace(prod, "B").matrix, rb.matrix, atol=1e-14)
    np.testing.assert_allclose(partial_trace(bell(), "A").matrix, np.eye(2) / 2, atol=1e-15)
    assert partial_trace(prod, ()).matrix[0, 0] == pytest.approx(1.0)
    with pytest.raises(FactorError):
        partial_trace(prod, "C")


def test_partial_trace_linearity():
    rng = np.random.default_rng(11)
    x = random_density_matrix(6, rng, factors=(("A", 2), ("B", 3)))
    y = random_density_matrix(6, rng, factors=(("A", 2), ("B", 3)))
    mix = DensityMatrix(0.3 * x.matrix + 0.7 * y.matrix, x.factors)
    np.testing.assert_allclose(
        partial_trace(mix, "B").matrix,
        0.3 * partial_trace(x, "B").matrix + 0.7 * partial_trace(y, "B").matrix,
        atol=1e-14,
    )


def test_classicalize_examples():
    plus = np.full((2, 2), 0.5)
    hs = classicalize(DensityMatrix(plus), "sys")
    np.testing.assert_allclose(hs.weights, [0.5, 0.5])
    np.testing.assert_allclose(hs.to_density().matrix, np.eye(2) / 2)
    # already block diagonal in the middle factor: unchanged
    rng = np.random.default_rng(2)
    parts = [random_density_matrix(4, rng, factors=(("A", 2), ("B", 2))) for _ in range(3)]
    blocks = np.zeros((2, 3, 2, 2, 3, 2), dtype=complex)
    w = [0.2, 0.5, 0.3]
    for c in range(3):
        blocks[:, c, :, :, c, :] = w[c] * parts[c].matrix.reshape(2, 2, 2, 2)
    rho = DensityMatrix(blocks.reshape(12, 12), (("A", 2), ("C", 3), ("B", 2)))
    back = classicalize(rho, "C").to_density()
    np.testing.assert_allclose(back.matrix, rho.matrix, atol=1e-15)
    assert back.factors == rho.factors


def test_classicalization_entropy_decomposition_and_monotonicity():
    rng = np.random.default_rng(13)
    for _ in range(1000):
        rho = random_density_matrix(4, rng, factors=(("q", 2), ("c", 2)))
        hs = classicalize(rho, "c")
        dephased = hs.to_density()
        s_blocks = shannon_entropy(hs.weights) + sum(
            p * vn_entropy(st) for p, st in hs.branches.values()
        )
        assert vn_entropy(dephased) == pytest.approx(s_blocks, abs=1e-10)
        assert vn_entropy(dephased) >= vn_entropy(rho) - 1e-10


def test_quantum_conditional_quantities():
    rng = np.random.default_rng(17)
    ra = random_density_matrix(2, rng, name="A")
    rb = random_density_matrix(2, rng, name="B")
    prod = kron_states(ra, rb)
    assert q_cond_entropy(prod, "A", "B") == pytest.approx(vn_entropy(ra), abs=1e-12)
    assert q_mutual_info(prod, "A", "B") == pytest.approx(0.0, abs=1e-12)
    assert q_cond_entropy(bell(), "A", "B") == pytest.approx(-LN2, abs=1e-12)
    assert q_mutual_info(bell(), "A", "B") == pytest.approx(2 * LN2, abs=1e-12)
    with pytest.raises(FactorError):
        q_cond_entropy(bell(), "A", "A")


def test_diagonal_reduction():
    rng = np.random.default_rng(19)
    for _ in range(50):
        t = rng.dirichlet(np.ones(6)).reshape(2, 3)
        j = JointDist(t, ("a", "b"))
        rho = diagonal_state(j)
        assert vn_entropy(rho) == pytest.approx(j.entropy(), abs=1e-10)
        assert q_cond_entropy(rho, "a", "b") == pytest.approx(cond_entropy(j, "a", "b"), abs=1e-10)
        assert q_mutual_info(rho, "a", "b") == pytest.approx(mutual_info(j, "a", "b"), abs=1e-10)


def test_classical_conditioning_on_block_diagonal_state():
    rng = np.random.default_rng(23)
    rho = classicalize(random_density_matrix(6, rng, factors=(("A", 3), ("B", 2))), "B")
    dense = rho.to_density()
    expected = sum(p * vn_entropy(st) for p, st in rho.branches.values())
    assert q_cond_entropy(dense, "A", "B") == pytest.approx(expected, abs=1e-10)
