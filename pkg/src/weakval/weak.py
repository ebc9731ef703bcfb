"""Exact weak values and expectation reconstruction from polar factors.

For ``A = U R`` the expectation ``<psi|A|psi>`` equals the weak value of
``R`` (pre-selected in ``psi``, post-selected in ``U^dagger psi``) times the
overlap ``<U^dagger psi|psi>``. With ``A = S U`` the same number is the weak
value of ``S`` (pre ``U psi``, post ``psi``) times ``<psi|U psi>``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvariantViolation, OrthogonalSelection
from .linalg import PolarFactors, as_matrix, as_state, polar_decompose

EPS_OVERLAP = 1e-8
IDENTITY_TOL = 1e-12

UNDEFINED = complex("nan+nanj")


@dataclass(frozen=True)
class WeakValueResult:
    weak_value: complex
    overlap: complex
    reconstructed_expectation: complex
    postselect_prob_zeroth: float
    fallback: bool = False

    @property
    def defined(self) -> bool:
        return not self.fallback


def _scale(a: np.ndarray) -> float:
    return max(1.0, float(np.abs(a).max(initial=0.0)))


def weak_value(op, pre, post) -> complex:
    """``<post|op|pre> / <post|pre>``.

    Raises :class:`OrthogonalSelection` when ``|<post|pre>| <= 1e-8``.
    """
    op = as_matrix(op)
    pre = as_state(pre)
    post = as_state(post)
    overlap = np.vdot(post, pre)
    if abs(overlap) <= EPS_OVERLAP:
        raise OrthogonalSelection(f"|<post|pre>| = {abs(overlap):.3e}")
    return complex(np.vdot(post, op @ pre) / overlap)


def weak_route(psd_op, pre, post, direct: complex) -> WeakValueResult:
    """Weak value of ``psd_op`` times ``<post|pre>``, or ``direct`` with
    ``fallback=True`` when the overlap is at most 1e-8.

    ``pre`` and ``post`` are taken as already validated.
    """
    pre = np.asarray(pre, dtype=complex)
    post = np.asarray(post, dtype=complex)
    overlap = complex(np.vdot(post, pre))
    if abs(overlap) <= EPS_OVERLAP:
        return WeakValueResult(UNDEFINED, overlap, direct, abs(overlap) ** 2, fallback=True)
    wv = complex(np.vdot(post, np.asarray(psd_op) @ pre) / overlap)
    return WeakValueResult(wv, overlap, wv * overlap, min(1.0, abs(overlap) ** 2))


def expectation_via_right_polar(a, psi, factors: PolarFactors | None = None) -> WeakValueResult:
    """Reconstruct ``<psi|A|psi>`` from the weak value of ``R`` in ``A = U R``.

    Post-selection is on ``U^dagger psi``. If that state is orthogonal to
    ``psi`` (to 1e-8) the expectation is evaluated directly and the weak
    value is set to NaN with ``fallback=True``.
    """
    a = as_matrix(a)
    psi = as_state(psi)
    pf = factors if factors is not None else polar_decompose(a)
    phi = pf.unitary.conj().T @ psi
    direct = complex(np.vdot(psi, a @ psi))
    return weak_route(pf.psd, psi, phi, direct)


def expectation_via_left_polar(a, psi, factors: PolarFactors | None = None) -> WeakValueResult:
    """Same as :func:`expectation_via_right_polar` using ``A = S U``: weak value
    of ``S`` with pre-selection ``U psi`` and post-selection ``psi``."""
    a = as_matrix(a)
    psi = as_state(psi)
    pf = factors if factors is not None else polar_decompose(a)
    chi = pf.unitary @ psi
    direct = complex(np.vdot(psi, a @ psi))
    # weak value here is <psi|S|chi>/<psi|chi>; overlap reported is <psi|chi>
    return weak_route(pf.left_psd, chi, psi, direct)


def weak_value_nonhermitian(a, pre, post, factors: PolarFactors | None = None) -> complex:
    """Weak value of an arbitrary operator through its polar factor ``R``.

    ``<post|A|pre>/<post|pre> = w_R * z`` where ``w_R`` is the weak value of
    ``R`` post-selected on ``U^dagger post`` and
    ``z = <U^dagger post|pre> / <post|pre>``. When ``U^dagger post`` is
    orthogonal to ``pre`` the factorisation is unavailable and the direct
    ratio is returned.
    """
    a = as_matrix(a)
    pre = as_state(pre)
    post = as_state(post)
    overlap = complex(np.vdot(post, pre))
    if abs(overlap) <= EPS_OVERLAP:
        raise OrthogonalSelection(f"|<post|pre>| = {abs(overlap):.3e}")
    numerator = complex(np.vdot(post, a @ pre))
    pf = factors if factors is not None else polar_decompose(a)
    post2 = pf.unitary.conj().T @ post
    inner = complex(np.vdot(post2, pre))
    if abs(inner) <= EPS_OVERLAP:
        return numerator / overlap
    w_r = weak_value(pf.psd, pre, post2)
    routed = w_r * inner
    if abs(routed - numerator) > IDENTITY_TOL * _scale(a):
        raise InvariantViolation(
            "weak-value factorisation", f"|{routed} - {numerator}| exceeds tolerance"
        )
    return w_r * (inner / overlap)


def matrix_element_via_weak(a, bra, ket) -> complex:
    """``<bra|A|ket>`` assembled from weak values.

    For non-orthogonal ``bra``/``ket`` this is the weak value times
    ``<bra|ket>``. Otherwise ``ket`` is rewritten as ``n*k1 - bra`` with
    ``k1 = (ket + bra)/n`` and both resulting elements, each with a
    non-degenerate overlap, are measured separately.
    """
    a = as_matrix(a)
    bra = as_state(bra)
    ket = as_state(ket)
    overlap = complex(np.vdot(bra, ket))
    if abs(overlap) > EPS_OVERLAP:
        return weak_value_nonhermitian(a, ket, bra) * overlap
    shifted = ket + bra
    n = float(np.linalg.norm(shifted))
    k1 = shifted / n
    first = weak_value_nonhermitian(a, k1, bra) * complex(np.vdot(bra, k1))
    second = weak_value_nonhermitian(a, bra, bra)
    return n * first - second

