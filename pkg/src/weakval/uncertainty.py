"""Variances of non-Hermitian operators and the uncertainty relations built
on them: the weak-value form for two arbitrary operators, the creation /
annihilation example in phase states, and the sum-of-variances relation."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvariantViolation, NotHermitian, NotOrthogonal
from .linalg import as_matrix, as_state, basis_state, is_hermitian, normalize, polar_decompose
from .weak import EPS_OVERLAP, UNDEFINED

SLACK = 1e-10
VAR_CLAMP = 1e-12


def variance_nonhermitian(a, psi) -> float:
    """``<psi|(A^dagger - <A^dagger>)(A - <A>)|psi>``, computed as ``<f|f>``
    with ``|f> = (A - <A>)|psi>``."""
    a = as_matrix(a)
    psi = as_state(psi)
    a_psi = a @ psi
    f = a_psi - np.vdot(psi, a_psi) * psi
    var = float(np.vdot(f, f).real)
    return 0.0 if -VAR_CLAMP <= var < 0.0 else var


@dataclass(frozen=True)
class UncertaintyReport:
    delta_a: float
    delta_b: float
    product_lhs: float
    bound_rhs: float
    weak_value_bound_term: complex
    overlap_term: complex
    cauchy_schwarz_rhs: float  # |<f|g>| from the defining vectors

    @property
    def slack(self) -> float:
        return self.product_lhs - self.bound_rhs


def uncertainty_bound(a, b, psi) -> UncertaintyReport:
    """Generalized uncertainty relation for two arbitrary operators.

    With left polar forms ``A = S_A U_A`` and ``B = S_B U_B``,
    ``dA dB >= |<phi|S_A P S_B|chi>| = |w| |<phi|chi>|`` where
    ``P = 1 - |psi><psi|``, ``phi = U_A psi``, ``chi = U_B psi`` and ``w`` is
    the weak value of ``S_A P S_B`` with pre-selection ``chi`` and
    post-selection ``phi``.
    """
    a = as_matrix(a)
    b = as_matrix(b)
    psi = as_state(psi)
    da = math.sqrt(variance_nonhermitian(a, psi))
    db = math.sqrt(variance_nonhermitian(b, psi))

    pa = polar_decompose(a)
    pb = polar_decompose(b)
    phi = pa.unitary @ psi
    chi = pb.unitary @ psi
    proj = np.eye(len(psi)) - np.outer(psi, psi.conj())
    op = pa.left_psd @ proj @ pb.left_psd
    element = complex(np.vdot(phi, op @ chi))
    overlap = complex(np.vdot(phi, chi))
    wv = element / overlap if abs(overlap) > EPS_OVERLAP else UNDEFINED

    f = a @ psi - np.vdot(psi, a @ psi) * psi
    g = b @ psi - np.vdot(psi, b @ psi) * psi
    cs = abs(complex(np.vdot(f, g)))

    report = UncertaintyReport(
        delta_a=da,
        delta_b=db,
        product_lhs=da * db,
        bound_rhs=abs(element),
        weak_value_bound_term=wv,
        overlap_term=overlap,
        cauchy_schwarz_rhs=cs,
    )
    if report.slack < -SLACK:
        raise InvariantViolation("uncertainty relation", f"slack {report.slack:.3e}")
    return report


# -- creation / annihilation in phase states --------------------------------


def phase_state_lhs(s: int) -> float:
    """``|s/2 - (s+1)^-2 sum_{m,n} sqrt(nm)|`` (product of uncertainties)."""
    root_sum = math.fsum(math.sqrt(n) for n in range(s + 1))
    return abs(s / 2 - root_sum**2 / (s + 1) ** 2)


def phase_state_rhs(s: int) -> float:
    """``(s+1)^-1 |sum_n sqrt(n(n-1)) - (s+1)^-1 sum_{m,n} sqrt(nm)|``."""
    root_sum = math.fsum(math.sqrt(n) for n in range(s + 1))
    pair_sum = math.fsum(math.sqrt(n * (n - 1)) for n in range(s + 1))
    return abs(pair_sum - root_sum**2 / (s + 1)) / (s + 1)


@dataclass(frozen=True)
class SweepRow:
    s: int
    lhs: float
    rhs: float
    lhs_matrix: float
    rhs_matrix: float  # |<(a^dagger)^2> - <a^dagger>^2| from matrices
    rhs_weak_form: float  # weak-value form of the general relation

    @property
    def slack(self) -> float:
        return self.lhs - self.rhs


def creation_annihilation_bound_sweep(s_max: int, theta0: float = 0.0, m: int = 0) -> list[SweepRow]:
    """Rows ``(s, lhs, rhs)`` for ``s = 1..s_max`` in the phase state ``|theta_m>``.

    ``lhs``/``rhs`` come from the closed sums; the ``*_matrix`` and
    ``rhs_weak_form`` columns recompute them from the truncated matrices.
    """
    from .phase import PhaseSpaceConfig, lowering, phase_state

    if s_max < 1:
        raise ValueError("s_max must be >= 1")
    rows = []
    for s in range(1, s_max + 1):
        if not 0 <= m <= s:
            raise ValueError(f"m={m} outside 0..{s}")
        cfg = PhaseSpaceConfig(s, theta0)
        theta = phase_state(cfg, m)
        low = lowering(s)
        high = low.conj().T
        report = uncertainty_bound(high, low, theta)
        mean_high = np.vdot(theta, high @ theta)
        mean_high2 = np.vdot(theta, high @ high @ theta)
        lhs, rhs = phase_state_lhs(s), phase_state_rhs(s)
        row = SweepRow(
            s=s,
            lhs=lhs,
            rhs=rhs,
            lhs_matrix=report.product_lhs,
            rhs_matrix=abs(complex(mean_high2 - mean_high**2)),
            rhs_weak_form=report.bound_rhs,
        )
        lhs_off = abs(row.lhs - row.lhs_matrix) > 1e-9 * max(1.0, lhs)
        rhs_off = abs(row.rhs - row.rhs_matrix) > 1e-9 * max(1.0, rhs)
        if lhs_off or rhs_off:
            raise InvariantViolation("phase-state sums", f"closed sums disagree with matrices at s={s}")
        rows.append(row)
    return rows


# -- stronger (sum form) relation -------------------------------------------


def default_orthogonal(psi) -> np.ndarray:
    """Gram-Schmidt of the lowest-index basis vector not parallel to ``psi``."""
    psi = as_state(psi)
    for k in range(len(psi)):
        e = basis_state(len(psi), k)
        v = e - np.vdot(psi, e) * psi
        if np.linalg.norm(v) > 1e-6:
            return normalize(v)
    raise ValueError("dimension 1 has no orthogonal state")


@dataclass(frozen=True)
class StrongerReport:
    sign: int
    lhs: float
    commutator_term: float
    overlap_term: float  # |<psi|A +- iB|psibar>|^2
    rhs: float
    weak_value: complex
    postselect_overlap: complex
    weak_route_term: float  # |w|^2 |<phi|psi>|^2, equals overlap_term

    @property
    def slack(self) -> float:
        return self.lhs - self.rhs


def stronger_uncertainty_check(a, b, psi, psibar=None, sign: int = 1) -> StrongerReport:
    """Sum-of-variances relation for Hermitian ``A``, ``B``:

    ``dA^2 + dB^2 >= +-i<[A,B]> + |<psi|A +- iB|psibar>|^2``.

    The last term is also produced via the weak value of ``R`` in the polar
    decomposition ``A -+ iB = U R``, pre-selection ``psi`` and post-selection
    ``U^dagger psibar``.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    a = as_matrix(a)
    b = as_matrix(b)
    if not (is_hermitian(a) and is_hermitian(b)):
        raise NotHermitian("stronger relation needs Hermitian operators")
    psi = as_state(psi)
    psibar = default_orthogonal(psi) if psibar is None else as_state(psibar)
    if abs(np.vdot(psibar, psi)) > 1e-10:
        raise NotOrthogonal("psibar must be orthogonal to psi")

    lhs = variance_nonhermitian(a, psi) + variance_nonhermitian(b, psi)
    comm = a @ b - b @ a
    comm_term = float((sign * 1j * np.vdot(psi, comm @ psi)).real)
    plus = a + sign * 1j * b
    overlap_term = abs(complex(np.vdot(psi, plus @ psibar))) ** 2

    minus = a - sign * 1j * b
    pf = polar_decompose(minus)
    phi = pf.unitary.conj().T @ psibar
    ov = complex(np.vdot(phi, psi))
    element = complex(np.vdot(phi, pf.psd @ psi))
    if abs(ov) > EPS_OVERLAP:
        wv = element / ov
        routed = abs(wv) ** 2 * abs(ov) ** 2
    else:
        wv = UNDEFINED
        routed = abs(element) ** 2
    scale = max(1.0, float(np.abs(minus).max())) ** 2
    if abs(routed - overlap_term) > 1e-12 * scale:
        raise InvariantViolation("stronger relation weak route", f"{routed} vs {overlap_term}")
    report = StrongerReport(
        sign=sign,
        lhs=lhs,
        commutator_term=comm_term,
        overlap_term=overlap_term,
        rhs=comm_term + overlap_term,
        weak_value=wv,
        postselect_overlap=ov,
        weak_route_term=routed,
    )
    if report.slack < -SLACK:
        raise InvariantViolation("stronger uncertainty relation", f"slack {report.slack:.3e}")
    return report


@dataclass(frozen=True)
class OscillatorDemo:
    report: StrongerReport
    canonical_rhs: float  # 1 + 2|<psi|a^dagger|psibar>|^2, valid only in infinite dimension
    commutator_defect: float  # max |[X,P] - i| over the truncated space


def truncated_oscillator_demo(dim: int = 20, psi=None, psibar=None) -> OscillatorDemo:
    """Sum-of-variances relation for ``X``, ``P`` on a truncated oscillator.

    ``a^dagger = (X - iP)/sqrt(2)``; the minus sign is used so the overlap
    term is ``2|<psi|a^dagger|psibar>|^2``. The exact truncated commutator
    enters the relation; ``canonical_rhs`` is reported for comparison only.
    """
    from .phase import lowering

    low = lowering(dim - 1)
    high = low.conj().T
    x = (low + high) / math.sqrt(2)
    p = (low - high) / (1j * math.sqrt(2))
    psi = basis_state(dim, 0) if psi is None else as_state(psi)
    psibar = basis_state(dim, 1) if psibar is None else as_state(psibar)
    report = stronger_uncertainty_check(x, p, psi, psibar, sign=-1)
    canonical = 1.0 + 2.0 * abs(complex(np.vdot(psi, high @ psibar))) ** 2
    defect = float(np.abs(x @ p - p @ x - 1j * np.eye(dim)).max())
    return OscillatorDemo(report=report, canonical_rhs=canonical, commutator_defect=defect)
