"""Finite-dimensional (Pegg-Barnett) phase formalism on the truncated Fock
space ``span{|0>, ..., |s>}``.

Phase states ``|theta_m> = (s+1)^(-1/2) sum_n exp(i n theta_m)|n>`` with
``theta_m = theta0 + 2 pi m / (s+1)`` are orthonormal. The Hermitian phase
operator is diagonal in them, and the ladder operators factor as
``a = exp(i phi) sqrt(N)`` and ``a^dagger = sqrt(N) exp(-i phi)``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import IndexOutOfRange, InvariantViolation
from .linalg import PolarFactors, as_state
from .weak import WeakValueResult, expectation_via_right_polar, weak_route

PHI_BAND_TOL = 1e-9
IMAG_TOL = 1e-10


@dataclass(frozen=True)
class PhaseSpaceConfig:
    s: int
    theta0: float = 0.0

    def __post_init__(self):
        if self.s < 1:
            raise ValueError(f"s must be >= 1, got {self.s}")

    @property
    def dim(self) -> int:
        return self.s + 1

    def angles(self) -> np.ndarray:
        return self.theta0 + 2.0 * np.pi * np.arange(self.dim) / self.dim


def lowering(s: int) -> np.ndarray:
    """Truncated annihilation operator, ``a|n> = sqrt(n)|n-1>``."""
    return np.diag(np.sqrt(np.arange(1, s + 1)), k=1).astype(complex)


def number_root(s: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(s + 1))).astype(complex)


def phase_basis(cfg: PhaseSpaceConfig) -> np.ndarray:
    """Matrix whose columns are the phase states ``|theta_0>, ..., |theta_s>``."""
    n = np.arange(cfg.dim)
    return np.exp(1j * np.outer(n, cfg.angles())) / math.sqrt(cfg.dim)


def phase_state(cfg: PhaseSpaceConfig, m: int) -> np.ndarray:
    if not 0 <= m <= cfg.s:
        raise IndexOutOfRange(f"m={m} outside 0..{cfg.s}")
    n = np.arange(cfg.dim)
    return np.exp(1j * n * cfg.angles()[m]) / math.sqrt(cfg.dim)


def phase_operator(cfg: PhaseSpaceConfig) -> np.ndarray:
    basis = phase_basis(cfg)
    return (basis * cfg.angles()) @ basis.conj().T


def phase_exponential(cfg: PhaseSpaceConfig, sign: int = 1) -> np.ndarray:
    """``exp(sign * i * phi)`` assembled from its spectral form."""
    basis = phase_basis(cfg)
    return (basis * np.exp(sign * 1j * cfg.angles())) @ basis.conj().T


def apply_phase_exponential(cfg: PhaseSpaceConfig, psi, sign: int = 1) -> np.ndarray:
    """``exp(sign * i * phi) @ psi`` as a cyclic shift of number-state
    amplitudes: ``exp(-i phi)|n> = |n+1>`` for ``n < s`` and
    ``exp(-i phi)|s> = exp(-i (s+1) theta0)|0>``; ``sign=+1`` is the inverse.
    """
    psi = np.asarray(psi, dtype=complex)
    wrap = cmath.exp(-1j * cfg.dim * cfg.theta0)
    if sign == -1:
        return np.concatenate(([wrap * psi[-1]], psi[:-1]))
    if sign == 1:
        return np.concatenate((psi[1:], [psi[0] / wrap]))
    raise ValueError("sign must be +1 or -1")


def annihilation_polar(cfg: PhaseSpaceConfig) -> PolarFactors:
    """``a = U R`` with ``U = exp(i phi)`` and ``R = sqrt(N)``."""
    u = phase_exponential(cfg, +1)
    r = number_root(cfg.s)
    return PolarFactors(unitary=u, psd=r, left_psd=u @ r @ u.conj().T)


def creation_polar(cfg: PhaseSpaceConfig) -> PolarFactors:
    """``a^dagger = S U`` with ``S = sqrt(N)`` and ``U = exp(-i phi)``; the
    right factor is ``R = U^dagger S U``."""
    u = phase_exponential(cfg, -1)
    s = number_root(cfg.s)
    return PolarFactors(unitary=u, psd=u.conj().T @ s @ u, left_psd=s)


def creation_expectation_via_weak(cfg: PhaseSpaceConfig, psi) -> WeakValueResult:
    """``<psi|a^dagger|psi>`` as the weak value of ``sqrt(N)`` (pre-selection
    ``chi = exp(-i phi) psi``, post-selection ``psi``) times ``<psi|chi>``.

    Number states make ``chi`` orthogonal to ``psi``; the result then falls
    back to direct evaluation with ``fallback=True``.
    """
    psi = as_state(psi)
    if psi.shape[0] != cfg.dim:
        raise ValueError(f"state has dimension {psi.shape[0]}, expected {cfg.dim}")
    chi = apply_phase_exponential(cfg, psi, -1)
    root = np.sqrt(np.arange(cfg.dim))
    direct = complex(np.sum(psi[:-1] * psi[1:].conj() * root[1:]))
    return weak_route(np.diag(root).astype(complex), chi, psi, direct)


def creation_weak_value_closed_form(cfg: PhaseSpaceConfig, coeffs) -> complex:
    """Weak value of ``sqrt(N)`` for ``psi = sum c_m |m>`` from the explicit
    sums over neighbouring coefficients."""
    c = np.asarray(coeffs, dtype=complex)
    m = np.arange(1, cfg.dim)
    num = np.sum(c[:-1] * c[1:].conj() * np.sqrt(m))
    den = c[-1] * c[0].conj() * cmath.exp(-1j * cfg.dim * cfg.theta0) + np.sum(c[:-1] * c[1:].conj())
    return complex(num / den)


def equal_superposition(s: int, nu: float = 0.0) -> np.ndarray:
    m = np.arange(s + 1)
    return np.exp(1j * nu * m) / math.sqrt(s + 1)


def creation_matrix_expectation(cfg: PhaseSpaceConfig, psi) -> WeakValueResult:
    """Same quantity through the generic SVD polar route, for cross-checks."""
    high = lowering(cfg.s).conj().T
    return expectation_via_right_polar(high, psi)


@dataclass(frozen=True)
class RamanujanReport:
    s: int
    direct_sum: float
    formula_value_minus_phi: float
    phi_s_2: float
    imag_residue: float
    exact_sum: float


def ramanujan_formula(s: int, r: float = 2.0) -> float:
    """``r/(r+1) (s+1)^((r+1)/r) - (1/2)(s+1)^(1/r)``; the power sum
    ``sum_{m<=s} m^(1/r)`` falls below it by an amount in ``[0, 1/2]``."""
    return r / (r + 1) * (s + 1) ** ((r + 1) / r) - 0.5 * (s + 1) ** (1 / r)


def ramanujan_verify(s: int, nu: float = 0.0) -> RamanujanReport:
    """Recover ``sum_{m=1}^s sqrt(m)`` from ``<psi|a^dagger|psi>`` in the
    equal superposition ``c_m = exp(i nu m)/sqrt(s+1)`` and compare with the
    closed formula. The inversion is ``sum = exp(i nu) (s+1) <a^dagger>``.
    """
    cfg = PhaseSpaceConfig(s)
    psi = equal_superposition(s, nu)
    result = creation_expectation_via_weak(cfg, psi)
    recovered = cmath.exp(1j * nu) * (s + 1) * result.reconstructed_expectation
    if abs(recovered.imag) >= IMAG_TOL:
        raise InvariantViolation("Ramanujan inversion", f"imaginary residue {recovered.imag:.3e}")
    formula = ramanujan_formula(s, 2.0)
    phi = formula - recovered.real
    report = RamanujanReport(
        s=s,
        direct_sum=recovered.real,
        formula_value_minus_phi=formula,
        phi_s_2=phi,
        imag_residue=abs(recovered.imag),
        exact_sum=math.fsum(math.sqrt(m) for m in range(1, s + 1)),
    )
    if not -PHI_BAND_TOL <= phi <= 0.5 + PHI_BAND_TOL:
        raise InvariantViolation("Ramanujan band", f"Phi_{s}(2) = {phi}")
    return report
