"""Two-level PT-symmetric Hamiltonian

    H = [[r e^{i theta}, t], [s, r e^{-i theta}]]

with closed-form eigensystem and polar decomposition, and the weak-value
route to ``<psi|H|psi>``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import ExceptionalPoint, SingularR
from .linalg import PolarFactors, polar_decompose
from .weak import WeakValueResult, expectation_via_right_polar

EP_TOL = 1e-12
COS_ALPHA_MIN = 1e-8


@dataclass(frozen=True)
class PTParams:
    r: float
    s: float
    t: float
    theta: float

    @property
    def discriminant(self) -> float:
        return self.s * self.t - (self.r * math.sin(self.theta)) ** 2

    @property
    def unbroken(self) -> bool:
        return self.discriminant > 0

    @property
    def exceptional(self) -> bool:
        return abs(self.discriminant) < EP_TOL

    @property
    def singular(self) -> bool:
        """``r^2 = s t``: ``H`` and its positive factor are not invertible."""
        scale = max(1.0, self.r**2, abs(self.s * self.t))
        return abs(self.r**2 - self.s * self.t) < EP_TOL * scale


@dataclass(frozen=True)
class BlochState:
    eta: float
    xi: float

    def vector(self) -> np.ndarray:
        return np.array(
            [math.cos(self.eta / 2), cmath.exp(1j * self.xi) * math.sin(self.eta / 2)]
        )


def pt_hamiltonian(p: PTParams) -> np.ndarray:
    return np.array(
        [
            [p.r * cmath.exp(1j * p.theta), p.t],
            [p.s, p.r * cmath.exp(-1j * p.theta)],
        ],
        dtype=complex,
    )


def pt_r_squared(p: PTParams) -> np.ndarray:
    """``H^dagger H = [[r^2 + s^2, r(s+t) e^{-i theta}], [r(s+t) e^{i theta}, r^2 + t^2]]``."""
    off = p.r * (p.s + p.t)
    return np.array(
        [
            [p.r**2 + p.s**2, off * cmath.exp(-1j * p.theta)],
            [off * cmath.exp(1j * p.theta), p.r**2 + p.t**2],
        ],
        dtype=complex,
    )


@dataclass(frozen=True)
class PTEigensystem:
    eps_plus: complex
    eps_minus: complex
    vec_plus: np.ndarray
    vec_minus: np.ndarray
    alpha: float | None
    broken: bool
    closed_form_vectors: bool


def pt_eigensystem(p: PTParams) -> PTEigensystem:
    """Eigenvalues ``r cos(theta) +- sqrt(st - r^2 sin^2 theta)``.

    In the unbroken regime with ``st > 0`` the eigenvectors are
    ``(t/s)^(1/4) e^{+-i alpha/2}`` and ``+-sgn(t) (s/t)^(1/4) e^{-+i alpha/2}``
    (scaled by ``1/sqrt(2 cos alpha)``) where ``sin alpha = r sin(theta)/sqrt(st)``;
    for ``s = t`` this is the familiar symmetric form. Elsewhere the
    eigenvectors come from a numerical eigensolver, unit normalized.

    Raises
    ------
    ExceptionalPoint
        If ``|st - r^2 sin^2 theta| < 1e-12``.
    """
    disc = p.discriminant
    if abs(disc) < EP_TOL:
        raise ExceptionalPoint(f"st - r^2 sin^2(theta) = {disc:.3e}")
    root = cmath.sqrt(disc)
    base = p.r * math.cos(p.theta)
    eps_plus, eps_minus = base + root, base - root
    broken = disc < 0

    alpha = None
    if not broken and p.s * p.t > 0:
        alpha = math.asin(p.r * math.sin(p.theta) / math.sqrt(p.s * p.t))
    if alpha is not None and math.cos(alpha) > COS_ALPHA_MIN:
        norm = 1.0 / math.sqrt(2.0 * math.cos(alpha))
        top = (p.t / p.s) ** 0.25
        bottom = math.copysign(1.0, p.t) * (p.s / p.t) ** 0.25
        half = cmath.exp(0.5j * alpha)
        vp = norm * np.array([top * half, bottom / half])
        vm = norm * np.array([top / half, -bottom * half])
        return PTEigensystem(eps_plus, eps_minus, vp, vm, alpha, broken, True)

    h = pt_hamiltonian(p)
    w, v = np.linalg.eig(h)
    i_plus = int(np.argmin(np.abs(w - eps_plus)))
    vp = v[:, i_plus] / np.linalg.norm(v[:, i_plus])
    vm = v[:, 1 - i_plus] / np.linalg.norm(v[:, 1 - i_plus])
    return PTEigensystem(eps_plus, eps_minus, vp, vm, alpha, broken, False)


@dataclass(frozen=True)
class PTPolarFactors(PolarFactors):
    branch: str = "general"
    r_inverse: np.ndarray | None = None
    gauge_free: bool = False


def _closed_form_general(p: PTParams) -> PTPolarFactors:
    r, s, t, th = p.r, p.s, p.t, p.theta
    d = s - t
    a = math.sqrt(4 * r * r + d * d)
    # B_+ B_- = 2|r^2 - st|; the smaller root is taken from the product.
    det2 = 2 * abs(r * r - s * t)
    big = math.sqrt(2 * r * r + s * s + t * t + abs(s + t) * a)
    if s + t >= 0:
        b_plus, b_minus = big, det2 / big
    else:
        b_plus, b_minus = det2 / big, big
    gap = b_plus - b_minus
    e_p, e_m = cmath.exp(1j * th), cmath.exp(-1j * th)

    # Positive factor; the (0,1) entry carries e^{-i theta}, matching H^dagger H.
    r11 = (a - d) * b_minus + (a + d) * b_plus
    r22 = (a + d) * b_minus + (a - d) * b_plus
    off = 2 * r * gap
    root = np.array([[r11, off * e_m], [off * e_p, r22]], dtype=complex) / (2 * math.sqrt(2) * a)

    # Inverse and unitary need B_- > 0, i.e. r^2 != st.
    inv_pref = 1.0 / (math.sqrt(2) * a * b_plus * b_minus)
    r_inv = inv_pref * np.array([[r22, -off * e_m], [-off * e_p, r11]], dtype=complex)
    u11 = (r22 - 2 * t * gap) * r * e_p
    u12 = t * r11 - 2 * r * r * gap
    u21 = s * r22 - 2 * r * r * gap
    u22 = (r11 - 2 * s * gap) * r * e_m
    u = inv_pref * np.array([[u11, u12], [u21, u22]], dtype=complex)
    return PTPolarFactors(
        unitary=u, psd=root, left_psd=u @ root @ u.conj().T, branch="general", r_inverse=r_inv
    )


def pt_polar_closed_form(p: PTParams) -> PTPolarFactors:
    """Closed-form ``H = U R``.

    For ``s = t`` the two special forms are used whenever they give a
    positive ``R``: ``r > |s|`` gives ``R = [[r, s e^{-i theta}], [s e^{i theta}, r]]``
    with ``U = diag(e^{i theta}, e^{-i theta})``; ``s > |r|`` gives
    ``R = [[s, r e^{-i theta}], [r e^{i theta}, s]]`` with ``U = sigma_x``.
    Otherwise the general expressions in ``A = sqrt(4r^2 + (s-t)^2)`` and
    ``B_pm = sqrt(2r^2 + s^2 + t^2 pm (s+t) A)`` apply, with ``U = H R^-1``.

    Raises
    ------
    SingularR
        If ``r^2 = st``; :func:`pt_polar` falls back to the SVD path there.
    """
    if p.singular:
        raise SingularR("r^2 = st: positive factor is singular, U is not unique")
    r, s, th = p.r, p.s, p.theta
    e_p, e_m = cmath.exp(1j * th), cmath.exp(-1j * th)
    if p.s == p.t and r > abs(s):
        root = np.array([[r, s * e_m], [s * e_p, r]], dtype=complex)
        u = np.diag([e_p, e_m])
        return PTPolarFactors(u, root, u @ root @ u.conj().T, branch="s=t, r>s",
                              r_inverse=np.linalg.inv(root))
    if p.s == p.t and s > abs(r):
        root = np.array([[s, r * e_m], [r * e_p, s]], dtype=complex)
        u = np.array([[0, 1], [1, 0]], dtype=complex)
        return PTPolarFactors(u, root, u @ root @ u.conj().T, branch="s=t, r<s",
                              r_inverse=np.linalg.inv(root))
    if 4 * r * r + (p.s - p.t) ** 2 == 0.0:
        # r = 0, s = t < 0: H = s sigma_x
        root = abs(s) * np.eye(2, dtype=complex)
        u = math.copysign(1.0, s) * np.array([[0, 1], [1, 0]], dtype=complex)
        return PTPolarFactors(u, root, root.copy(), branch="r=0, s=t<0",
                              r_inverse=np.eye(2) / abs(s))
    return _closed_form_general(p)


def pt_polar(p: PTParams) -> PTPolarFactors:
    """Closed form where it exists, numerical SVD polar factors otherwise."""
    try:
        return pt_polar_closed_form(p)
    except SingularR:
        pf = polar_decompose(pt_hamiltonian(p))
        return PTPolarFactors(pf.unitary, pf.psd, pf.left_psd, branch="numerical", gauge_free=True)


def pt_expectation_printed(p: PTParams, state: BlochState) -> complex:
    """``r cos(theta) + s cos(xi) sin(eta) + i r sin(theta) cos(eta)``; exact for ``s = t``."""
    return complex(
        p.r * math.cos(p.theta) + p.s * math.cos(state.xi) * math.sin(state.eta),
        p.r * math.sin(p.theta) * math.cos(state.eta),
    )


def pt_expectation_general(p: PTParams, state: BlochState) -> complex:
    """``<psi|H|psi>`` for arbitrary ``s``, ``t``."""
    se = math.sin(state.eta)
    return complex(
        p.r * math.cos(p.theta) + 0.5 * (p.s + p.t) * math.cos(state.xi) * se,
        p.r * math.sin(p.theta) * math.cos(state.eta) + 0.5 * (p.t - p.s) * math.sin(state.xi) * se,
    )


@dataclass(frozen=True)
class PTExpectation:
    closed_form: complex  # general closed form
    printed_form: complex  # s = t form
    direct: complex
    weak: WeakValueResult
    polar_branch: str


def pt_expectation(p: PTParams, state: BlochState) -> PTExpectation:
    """``<psi|H|psi>`` by closed form, by direct evaluation and through the
    weak value of ``R`` with post-selection ``U^dagger psi``."""
    h = pt_hamiltonian(p)
    psi = state.vector()
    factors = pt_polar(p)
    weak = expectation_via_right_polar(h, psi, factors=factors)
    return PTExpectation(
        closed_form=pt_expectation_general(p, state),
        printed_form=pt_expectation_printed(p, state),
        direct=complex(np.vdot(psi, h @ psi)),
        weak=weak,
        polar_branch=factors.branch,
    )
