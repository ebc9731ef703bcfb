import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from weakval.errors import OrthogonalSelection
from weakval.linalg import polar_decompose, random_matrix, random_state
from weakval.pt import PTParams, pt_hamiltonian
from weakval.weak import (
    expectation_via_left_polar,
    expectation_via_right_polar,
    matrix_element_via_weak,
    weak_value,
    weak_value_nonhermitian,
)

SZ = np.diag([1.0, -1.0]).astype(complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
LOW = np.array([[0, 1], [0, 0]], dtype=complex)
KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)
PLUS = np.array([1, 1], dtype=complex) / math.sqrt(2)
MINUS = np.array([1, -1], dtype=complex) / math.sqrt(2)


def test_weak_value_eigenstate():
    assert abs(weak_value(SZ, KET0, KET0) - 1) < 1e-15


def test_weak_value_tilted_postselection():
    beta = math.pi / 8
    post = np.array([math.cos(beta), math.sin(beta)])
    wv = weak_value(SZ, PLUS, post)
    assert abs(wv - (math.cos(beta) - math.sin(beta)) / (math.cos(beta) + math.sin(beta))) < 1e-14
    assert abs(wv - 0.41421356237309503) < 1e-14


def test_weak_value_orthogonal_raises():
    with pytest.raises(OrthogonalSelection):
        weak_value(SZ, PLUS, MINUS)


def test_weak_value_can_exceed_spectrum():
    beta = math.pi / 4 - 0.01
    post = np.array([math.cos(beta), -math.sin(beta)])
    assert weak_value(SZ, PLUS, post).real > 50


def test_right_polar_psd_operator():
    h = np.array([[2, 1j], [-1j, 3]])
    res = expectation_via_right_polar(h, PLUS)
    assert abs(res.overlap - 1) < 1e-12
    assert abs(res.weak_value - np.vdot(PLUS, h @ PLUS)) < 1e-12


def test_lowering_expectation_both_routes():
    for route in (expectation_via_right_polar, expectation_via_left_polar):
        res = route(LOW, PLUS)
        assert abs(res.reconstructed_expectation - 0.5) < 1e-12


def test_pt_expectation_both_routes():
    h = pt_hamiltonian(PTParams(1.0, 2.0, 2.0, 0.3))
    for route in (expectation_via_right_polar, expectation_via_left_polar):
        res = route(h, KET0)
        assert abs(res.reconstructed_expectation - np.exp(0.3j)) < 1e-12


def test_fallback_is_flagged():
    # sigma_x = U R with R = I, U = sigma_x; U^dagger|0> = |1> is orthogonal to |0>.
    res = expectation_via_right_polar(SX, KET0)
    assert res.fallback
    assert not res.defined
    assert math.isnan(res.weak_value.real)
    assert res.reconstructed_expectation == 0


def test_result_invariants():
    rng = np.random.default_rng(0)
    a = random_matrix(4, rng)
    psi = random_state(4, rng)
    res = expectation_via_right_polar(a, psi)
    assert abs(res.reconstructed_expectation - res.weak_value * res.overlap) < 1e-12
    assert 0 <= res.postselect_prob_zeroth <= 1


def test_weak_value_nonhermitian_examples():
    assert abs(weak_value_nonhermitian(LOW, KET1, PLUS) - 1) < 1e-12
    assert abs(weak_value_nonhermitian(SX @ SZ, PLUS, KET0) + 1) < 1e-12
    h = np.array([[1, 0.5], [0.5, 2]], dtype=complex)
    assert abs(weak_value_nonhermitian(h, PLUS, PLUS) - np.vdot(PLUS, h @ PLUS)) < 1e-12


def test_weak_value_nonhermitian_orthogonal_raises():
    with pytest.raises(OrthogonalSelection):
        weak_value_nonhermitian(LOW, KET0, KET1)


def test_weak_value_nonhermitian_reduces_for_psd():
    rng = np.random.default_rng(2)
    x = random_matrix(3, rng)
    r = x.conj().T @ x
    pre, post = random_state(3, rng), random_state(3, rng)
    assert abs(weak_value_nonhermitian(r, pre, post) - weak_value(r, pre, post)) < 1e-12


def test_matrix_elements():
    assert abs(matrix_element_via_weak(SX, KET0, KET1) - 1) < 1e-12
    assert abs(matrix_element_via_weak(LOW, KET0, KET1) - 1) < 1e-12
    h = pt_hamiltonian(PTParams(1.0, 2.0, 3.0, math.pi / 4))
    direct = np.vdot(PLUS, h @ MINUS)
    assert abs(matrix_element_via_weak(h, PLUS, MINUS) - direct) < 1e-12


def test_matrix_elements_random():
    rng = np.random.default_rng(9)
    for _ in range(50):
        d = int(rng.integers(2, 6))
        a = random_matrix(d, rng)
        bra, ket = random_state(d, rng), random_state(d, rng)
        assert abs(matrix_element_via_weak(a, bra, ket) - np.vdot(bra, a @ ket)) < 1e-11


def test_linearity():
    rng = np.random.default_rng(4)
    a, b = random_matrix(3, rng), random_matrix(3, rng)
    pre, post = random_state(3, rng), random_state(3, rng)
    alpha, beta = 0.3 - 1.2j, 2.0 + 0.5j
    lhs = weak_value(alpha * a + beta * b, pre, post)
    rhs = alpha * weak_value(a, pre, post) + beta * weak_value(b, pre, post)
    assert abs(lhs - rhs) < 1e-12


@settings(max_examples=80, deadline=None)
@given(dim=st.integers(2, 8), seed=st.integers(0, 2**32 - 1))
def test_identity_chain_property(dim, seed):
    rng = np.random.default_rng(seed)
    a = random_matrix(dim, rng)
    psi = random_state(dim, rng)
    pf = polar_decompose(a)
    direct = np.vdot(psi, a @ psi)
    right = expectation_via_right_polar(a, psi, pf).reconstructed_expectation
    left = expectation_via_left_polar(a, psi, pf).reconstructed_expectation
    assert abs(right - direct) < 1e-12
    assert abs(left - direct) < 1e-12


@settings(max_examples=40, deadline=None)
@given(dim=st.integers(2, 6), seed=st.integers(0, 2**32 - 1))
def test_hermitian_pre_equals_post_is_real(dim, seed):
    rng = np.random.default_rng(seed)
    x = random_matrix(dim, rng)
    h = x + x.conj().T
    psi = random_state(dim, rng)
    assert abs(weak_value(h, psi, psi).imag) < 1e-12
