import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cainlab.bsc import (
    binary_entropy,
    c1_bsc_closed_forms,
    c1_bsc_table,
    c1_params_bsc,
    complement,
    h_monotone_check,
    m_matrix,
    sym_product,
    v_vector,
)
from cainlab.info import TransitionMatrix
from cainlab.szilard import table_c1

LN2 = math.log(2)
unit = st.floats(0.0, 1.0)


def test_sym_product_examples():
    for a in (0.0, 0.3, 0.77, 1.0):
        assert sym_product(a, 0.0) == pytest.approx(complement(a), abs=1e-15)
        assert sym_product(a, 1.0) == pytest.approx(a, abs=1e-15)
        assert sym_product(a, 0.5) == pytest.approx(0.5, abs=1e-15)
    assert sym_product(0.3, 0.6) == pytest.approx(0.46, abs=1e-15)
    assert sym_product(complement(0.3), 0.6) == pytest.approx(1 - 0.46, abs=1e-15)


def test_out_of_range_rejected():
    for bad in (-0.1, 1.1):
        with pytest.raises(ValueError):
            sym_product(bad, 0.5)
        with pytest.raises(ValueError):
            m_matrix(bad)
        with pytest.raises(ValueError):
            binary_entropy(bad)


@settings(max_examples=300)
@given(unit, unit, unit)
def test_sym_product_algebra(a, b, c):
    assert sym_product(a, b) == pytest.approx(sym_product(b, a), abs=1e-15)
    assert sym_product(sym_product(a, b), c) == pytest.approx(sym_product(a, sym_product(b, c)), abs=1e-15)
    assert 0.0 <= sym_product(a, b) <= 1.0
    # shaded-area reading: probability that two independent biased bits agree
    assert sym_product(a, b) == pytest.approx(a * b + (1 - a) * (1 - b), abs=1e-15)


def test_matrix_examples():
    np.testing.assert_array_equal(m_matrix(1.0), np.eye(2))
    np.testing.assert_allclose(m_matrix(0.5) @ v_vector(0.2), v_vector(0.5), atol=1e-15)
    np.testing.assert_allclose(m_matrix(0.8) @ v_vector(0.5), v_vector(0.5), atol=1e-15)
    np.testing.assert_allclose(m_matrix(0.7) @ m_matrix(0.9), m_matrix(0.66), atol=1e-14)
    assert TransitionMatrix(m_matrix(0.37)).doubly_stochastic


@settings(max_examples=300)
@given(unit, unit)
def test_matrix_homomorphism(a, b):
    np.testing.assert_allclose(m_matrix(b) @ m_matrix(a), m_matrix(sym_product(b, a)), atol=1e-14)
    np.testing.assert_allclose(m_matrix(a) @ v_vector(b), v_vector(sym_product(a, b)), atol=1e-14)


def test_binary_entropy_examples():
    assert binary_entropy(0.0) == 0.0 and binary_entropy(1.0) == 0.0
    assert binary_entropy(0.5) == pytest.approx(LN2, abs=1e-15)
    assert binary_entropy(0.8) == pytest.approx(0.500402, abs=1e-6)
    assert binary_entropy(0.3) == pytest.approx(binary_entropy(0.7), abs=1e-15)


def test_channel_conditional_entropy_is_h():
    from cainlab.info import JointDist, cond_entropy

    for a in (0.1, 0.5, 0.85):
        j = JointDist(m_matrix(a) * v_vector(0.3)[None, :], ("y", "x"))
        assert cond_entropy(j, "y", "x") == pytest.approx(binary_entropy(a), abs=1e-14)


def test_h_monotone_examples_and_grid():
    assert h_monotone_check(1.0, 0.3) == pytest.approx(0.0, abs=1e-15)
    assert h_monotone_check(0.5, 0.3) == pytest.approx(LN2 - binary_entropy(0.3), abs=1e-15)
    grid = np.linspace(0, 1, 21)
    assert min(h_monotone_check(a, l) for a in grid for l in grid) >= -1e-12


def test_table_examples():
    t = c1_bsc_closed_forms(0.5, 1.0, 1.0)
    assert t[1, 0] == pytest.approx(0.0, abs=1e-15)
    t = c1_bsc_closed_forms(0.5, 0.8, 0.9)
    assert t[0, 1] == pytest.approx(0.5004, abs=1e-4)


def test_table_equals_generic_pipeline_on_grid():
    grid = np.linspace(0, 1, 6)
    for l in grid:
        for a in grid:
            for b in grid:
                tab = c1_bsc_table(l, a, b)
                generic = table_c1(c1_params_bsc(l, a, b))
                np.testing.assert_allclose(tab.closed_form, generic.direct, atol=1e-10)
                np.testing.assert_allclose(tab.closed_form.sum(axis=0), 0.0, atol=1e-12)
                assert tab.max_cell_error() <= 1e-10
