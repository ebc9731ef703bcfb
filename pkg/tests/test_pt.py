import cmath
import math

import numpy as np
import pytest

from weakval.errors import ExceptionalPoint, SingularR
from weakval.linalg import polar_decompose
from weakval.pt import (
    BlochState,
    PTParams,
    pt_eigensystem,
    pt_expectation,
    pt_expectation_general,
    pt_expectation_printed,
    pt_hamiltonian,
    pt_polar,
    pt_polar_closed_form,
    pt_r_squared,
)

SX = np.array([[0, 1], [1, 0]], dtype=complex)


def _random_params(rng, equal=False):
    r, s, t = rng.uniform(-3, 3, 3)
    return PTParams(r, s, s if equal else t, rng.uniform(-math.pi, math.pi))


def test_hamiltonian_examples():
    assert np.abs(pt_hamiltonian(PTParams(0, 1, 1, 0.4)) - SX).max() < 1e-15
    assert np.abs(pt_hamiltonian(PTParams(2, 3, 5, 0)) - np.array([[2, 5], [3, 2]])).max() < 1e-15
    h = pt_hamiltonian(PTParams(1, 2, 3, math.pi / 4))
    assert abs(h[0, 0] - cmath.exp(1j * math.pi / 4)) < 1e-15
    assert h[0, 1] == 3 and h[1, 0] == 2


def test_eigensystem_examples():
    eig = pt_eigensystem(PTParams(0, 1, 1, 0.2))
    assert abs(eig.eps_plus - 1) < 1e-15 and abs(eig.eps_minus + 1) < 1e-15
    assert eig.alpha == 0
    eig = pt_eigensystem(PTParams(1, 2, 2, math.pi / 6))
    assert abs(eig.eps_plus - (math.sqrt(3) / 2 + math.sqrt(3.75))) < 1e-14
    assert abs(eig.eps_minus - (math.sqrt(3) / 2 - math.sqrt(3.75))) < 1e-14
    assert not eig.broken and eig.closed_form_vectors
    eig = pt_eigensystem(PTParams(2, 1, 1, math.pi / 2))
    assert eig.broken
    assert abs(eig.eps_plus - 1j * math.sqrt(3)) < 1e-14
    assert abs(eig.eps_minus + 1j * math.sqrt(3)) < 1e-14


def test_exceptional_point():
    with pytest.raises(ExceptionalPoint):
        pt_eigensystem(PTParams(1, 1, 1, math.pi / 2))
    assert PTParams(1, 1, 1, math.pi / 2).exceptional


def test_eigenvectors_random():
    rng = np.random.default_rng(0)
    checked_closed = 0
    for _ in range(300):
        p = _random_params(rng, equal=rng.random() < 0.3)
        if p.exceptional:
            continue
        eig = pt_eigensystem(p)
        h = pt_hamiltonian(p)
        for eps, v in ((eig.eps_plus, eig.vec_plus), (eig.eps_minus, eig.vec_minus)):
            assert np.abs(h @ v - eps * v).max() < 1e-10
        ref = np.linalg.eigvals(h)
        for eps in (eig.eps_plus, eig.eps_minus):
            assert np.abs(ref - eps).min() < 1e-10
        checked_closed += eig.closed_form_vectors
    assert checked_closed > 50


def test_symmetric_eigenvector_form():
    p = PTParams(1.0, 2.0, 2.0, 0.5)
    eig = pt_eigensystem(p)
    a = eig.alpha
    assert abs(math.sin(a) - math.sin(0.5) / 2) < 1e-15
    n = 1 / math.sqrt(2 * math.cos(a))
    vp = n * np.array([cmath.exp(0.5j * a), cmath.exp(-0.5j * a)])
    vm = n * np.array([cmath.exp(-0.5j * a), -cmath.exp(0.5j * a)])
    assert np.abs(eig.vec_plus - vp).max() < 1e-15
    assert np.abs(eig.vec_minus - vm).max() < 1e-15


def test_polar_special_case_r_greater():
    p = PTParams(3.0, 2.0, 2.0, 0.5)
    f = pt_polar_closed_form(p)
    e = cmath.exp(0.5j)
    assert f.branch == "s=t, r>s"
    assert np.abs(f.psd - np.array([[3, 2 / e], [2 * e, 3]])).max() < 1e-15
    assert np.abs(f.unitary - np.diag([e, 1 / e])).max() < 1e-15
    ref = polar_decompose(pt_hamiltonian(p))
    assert np.abs(ref.psd - f.psd).max() < 1e-9 and np.abs(ref.unitary - f.unitary).max() < 1e-9


def test_polar_special_case_r_smaller():
    p = PTParams(1.0, 2.0, 2.0, 0.5)
    f = pt_polar_closed_form(p)
    e = cmath.exp(0.5j)
    assert f.branch == "s=t, r<s"
    assert np.abs(f.psd - np.array([[2, 1 / e], [e, 2]])).max() < 1e-15
    assert np.abs(f.unitary - SX).max() < 1e-15
    ref = polar_decompose(pt_hamiltonian(PTParams(1.0, 2.0, 2.0, 0.3)))
    assert np.abs(ref.unitary - SX).max() < 1e-12


def test_polar_general_example():
    p = PTParams(1.0, 2.0, 3.0, math.pi / 4)
    f = pt_polar_closed_form(p)
    ref = polar_decompose(pt_hamiltonian(p))
    assert f.branch == "general"
    assert np.abs(ref.psd - f.psd).max() < 1e-9
    assert np.abs(ref.unitary - f.unitary).max() < 1e-9
    assert np.abs(f.psd @ f.psd - pt_r_squared(p)).max() < 1e-12
    assert np.abs(f.psd @ f.r_inverse - np.eye(2)).max() < 1e-10


def test_polar_random_contracts():
    rng = np.random.default_rng(1)
    for _ in range(300):
        p = _random_params(rng, equal=rng.random() < 0.3)
        if p.singular:
            continue
        f = pt_polar_closed_form(p)
        h = pt_hamiltonian(p)
        assert np.abs(f.unitary @ f.psd - h).max() < 1e-10
        assert np.abs(f.unitary.conj().T @ f.unitary - np.eye(2)).max() < 1e-10
        assert np.linalg.eigvalsh(f.psd).min() >= -1e-10
        assert np.abs(f.psd @ f.psd - pt_r_squared(p)).max() < 1e-12 * max(1.0, np.abs(h).max() ** 2)
        if np.linalg.svd(h, compute_uv=False).min() > 1e-6:
            ref = polar_decompose(h)
            assert np.abs(ref.psd - f.psd).max() < 1e-9
            assert np.abs(ref.unitary - f.unitary).max() < 1e-9


def test_singular_routes_to_svd():
    p = PTParams(2.0, 2.0, 2.0, 0.3)
    with pytest.raises(SingularR):
        pt_polar_closed_form(p)
    f = pt_polar(p)
    assert f.branch == "numerical" and f.gauge_free
    assert np.abs(f.right_product() - pt_hamiltonian(p)).max() < 1e-12


def test_expectation_basis_states():
    p = PTParams(1.3, 0.4, 2.2, 0.9)
    top = pt_expectation(p, BlochState(0.0, 0.0))
    assert abs(top.direct - 1.3 * cmath.exp(0.9j)) < 1e-15
    assert abs(top.closed_form - top.direct) < 1e-15
    bottom = pt_expectation(p, BlochState(math.pi, 0.0))
    assert abs(bottom.direct - 1.3 * cmath.exp(-0.9j)) < 1e-15
    assert abs(bottom.closed_form - bottom.direct) < 1e-15


def test_expectation_published_form_only_for_equal_couplings():
    p = PTParams(1.0, 2.0, 3.0, math.pi / 4)
    st = BlochState(math.pi / 2, 0.0)
    assert abs(pt_expectation_printed(p, st) - (math.cos(math.pi / 4) + 2)) < 1e-15
    ex = pt_expectation(p, st)
    assert abs(ex.direct - (math.cos(math.pi / 4) + 2.5)) < 1e-15
    assert abs(ex.closed_form - ex.direct) < 1e-15
    assert abs(ex.printed_form - ex.direct) > 0.4


def test_expectation_random():
    rng = np.random.default_rng(2)
    for k in range(200):
        p = _random_params(rng, equal=k % 2 == 0)
        st = BlochState(rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi))
        ex = pt_expectation(p, st)
        assert abs(ex.closed_form - ex.direct) < 1e-12
        assert abs(ex.weak.reconstructed_expectation - ex.direct) < 1e-12
        assert abs(pt_expectation_general(p, st) - ex.closed_form) == 0
        if p.s == p.t:
            assert abs(ex.printed_form - ex.direct) < 1e-12
