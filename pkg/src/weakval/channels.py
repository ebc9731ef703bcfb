"""Kraus channels, input/output fidelity and the variance identity
``F + sum_k dE_k^2 = 1``.

Fidelities are computed twice: from the output density matrix, and from the
Kraus expectations ``<E_k>`` reconstructed through the polar weak-value
route. The amplitude-damping channel has closed forms for all quantities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, InvariantViolation, NotTracePreserving, WrongKrausCount
from .linalg import as_matrix, as_state, is_hermitian, polar_decompose
from .uncertainty import variance_nonhermitian
from .weak import expectation_via_right_polar

TP_TOL = 1e-10
IDENTITY_TOL = 1e-10
ROUTE_TOL = 1e-12
ORDER_SLACK = 1e-10


@dataclass(frozen=True)
class KrausChannel:
    kraus: tuple[np.ndarray, ...]

    def __post_init__(self):
        ops = tuple(as_matrix(k) for k in self.kraus)
        if not ops:
            raise WrongKrausCount("channel needs at least one Kraus operator")
        dim = ops[0].shape[0]
        if any(k.shape != (dim, dim) for k in ops):
            raise DimensionMismatch("Kraus operators have different shapes")
        total = sum(k.conj().T @ k for k in ops)
        if np.abs(total - np.eye(dim)).max() > TP_TOL:
            raise NotTracePreserving("sum_k E_k^dagger E_k != I")
        object.__setattr__(self, "kraus", ops)

    @property
    def dim(self) -> int:
        return self.kraus[0].shape[0]


@dataclass(frozen=True)
class DensityMatrix:
    entries: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.entries, dtype=complex)
        if not is_hermitian(rho):
            raise InvariantViolation("density matrix", "not Hermitian")
        if abs(np.trace(rho) - 1) > 1e-10:
            raise InvariantViolation("density matrix", f"trace {np.trace(rho)}")
        if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() < -1e-10:
            raise InvariantViolation("density matrix", "negative eigenvalue")
        object.__setattr__(self, "entries", rho)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


def _check_dims(ch: KrausChannel, psi) -> np.ndarray:
    psi = as_state(psi)
    if psi.shape[0] != ch.dim:
        raise DimensionMismatch(f"state dim {psi.shape[0]} != channel dim {ch.dim}")
    return psi


def apply_channel(ch: KrausChannel, psi) -> DensityMatrix:
    psi = _check_dims(ch, psi)
    rho = sum(np.outer(k @ psi, (k @ psi).conj()) for k in ch.kraus)
    return DensityMatrix(rho)


@dataclass(frozen=True)
class ChannelReport:
    fidelity: float
    variance_sum: float
    per_kraus_variance: tuple[float, ...]
    fidelity_weak_route: float
    kraus_expectations: tuple[complex, ...] = field(repr=False)
    fallback_flags: tuple[bool, ...] = field(repr=False, default=())


def channel_fidelity(ch: KrausChannel, psi) -> ChannelReport:
    """Fidelity ``<psi|rho|psi>`` and Kraus variances.

    Also returns ``sum_k |<E_k>|^2`` with every ``<E_k>`` reconstructed from
    the weak value of the positive part of ``E_k``.
    """
    psi = _check_dims(ch, psi)
    rho = apply_channel(ch, psi).entries
    fid = float(np.vdot(psi, rho @ psi).real)
    results = [expectation_via_right_polar(k, psi) for k in ch.kraus]
    expectations = tuple(r.reconstructed_expectation for r in results)
    fid_weak = math.fsum(abs(e) ** 2 for e in expectations)
    variances = tuple(variance_nonhermitian(k, psi) for k in ch.kraus)
    var_sum = math.fsum(variances)
    if abs(fid - fid_weak) > ROUTE_TOL:
        raise InvariantViolation("fidelity routes", f"{fid} vs {fid_weak}")
    if abs(fid + var_sum - 1.0) > IDENTITY_TOL:
        raise InvariantViolation("F + sum dE^2 = 1", f"residual {fid + var_sum - 1.0:.3e}")
    return ChannelReport(
        fidelity=fid,
        variance_sum=var_sum,
        per_kraus_variance=variances,
        fidelity_weak_route=fid_weak,
        kraus_expectations=expectations,
        fallback_flags=tuple(r.fallback for r in results),
    )


def orthogonal_qubit_state(psi) -> np.ndarray:
    """The qubit state orthogonal to ``psi``, first nonzero entry real positive."""
    psi = as_state(psi)
    if psi.shape[0] != 2:
        raise DimensionMismatch("orthogonal complement is a single state only for qubits")
    perp = np.array([-psi[1].conj(), psi[0].conj()])
    k = 0 if abs(perp[0]) > 1e-14 else 1
    return perp * (abs(perp[k]) / perp[k])


@dataclass(frozen=True)
class TwoKrausBounds:
    lower: float
    middle: float
    upper: float
    delta_1: float
    delta_2: float
    fidelity: float
    weak_value: complex
    overlap: complex


def two_kraus_bounds(ch: KrausChannel, psi) -> TwoKrausBounds:
    """``(1 - F)/2 >= dE_1 dE_2 >= |<phi|S_1 P S_2|chi>|``.

    ``E_k = S_k U_k`` (left polar), ``phi = U_1 psi``, ``chi = U_2 psi``. For
    a qubit ``P = |psi_perp><psi_perp|``; in higher dimension the projector
    ``1 - |psi><psi|`` is used.
    """
    if len(ch.kraus) != 2:
        raise WrongKrausCount(f"expected 2 Kraus operators, got {len(ch.kraus)}")
    psi = _check_dims(ch, psi)
    e1, e2 = ch.kraus
    report = channel_fidelity(ch, psi)
    d1 = math.sqrt(report.per_kraus_variance[0])
    d2 = math.sqrt(report.per_kraus_variance[1])

    p1 = polar_decompose(e1)
    p2 = polar_decompose(e2)
    phi = p1.unitary @ psi
    chi = p2.unitary @ psi
    if ch.dim == 2:
        perp = orthogonal_qubit_state(psi)
        element = complex(np.vdot(phi, p1.left_psd @ perp) * np.vdot(perp, p2.left_psd @ chi))
    else:
        proj = np.eye(ch.dim) - np.outer(psi, psi.conj())
        element = complex(np.vdot(phi, p1.left_psd @ proj @ p2.left_psd @ chi))
    overlap = complex(np.vdot(phi, chi))
    wv = element / overlap if abs(overlap) > 1e-8 else complex("nan+nanj")

    bounds = TwoKrausBounds(
        lower=abs(element),
        middle=d1 * d2,
        upper=(1.0 - report.fidelity) / 2.0,
        delta_1=d1,
        delta_2=d2,
        fidelity=report.fidelity,
        weak_value=wv,
        overlap=overlap,
    )
    if not (bounds.upper >= bounds.middle - ORDER_SLACK and bounds.middle >= bounds.lower - ORDER_SLACK):
        raise InvariantViolation("two-Kraus ordering", repr(bounds))
    return bounds


# -- amplitude damping --------------------------------------------------------


def amplitude_damping(p: float) -> KrausChannel:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p={p} outside [0, 1]")
    e1 = np.array([[1.0, 0.0], [0.0, math.sqrt(1.0 - p)]], dtype=complex)
    e2 = np.array([[0.0, math.sqrt(p)], [0.0, 0.0]], dtype=complex)
    return KrausChannel((e1, e2))


def bloch_qubit(theta: float, phi: float) -> np.ndarray:
    return np.array([math.cos(theta / 2), np.exp(1j * phi) * math.sin(theta / 2)])


def amplitude_damping_output(theta: float, phi: float, p: float) -> np.ndarray:
    """Output state ``(1/2)[e1|0><0| + e2|1><1| + e3|0><1| + e3*|1><0|]``."""
    e1 = 1 + p + (1 - p) * math.cos(theta)
    e2 = (1 - p) * (1 - math.cos(theta))
    e3 = np.exp(-1j * phi) * math.sqrt(1 - p) * math.sin(theta)
    return 0.5 * np.array([[e1, e3], [np.conj(e3), e2]])


def amplitude_damping_fidelity(theta: float, p: float) -> float:
    q = math.sqrt(1 - p)
    return 0.25 * (3 + q - p + 2 * p * math.cos(theta) + (1 - p - q) * math.cos(2 * theta))


def amplitude_damping_deltas(theta: float, p: float) -> tuple[float, float]:
    """Closed-form ``(dE_1, dE_2)``: ``cos(t/2) sin(t/2) (1 - sqrt(1-p))`` and
    ``sqrt(p) sin^2(t/2)``."""
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return c * s * (1 - math.sqrt(1 - p)), math.sqrt(p) * s * s


def amplitude_damping_lower(theta: float, p: float) -> float:
    """Closed form of ``|<phi|S_1|psi_perp><psi_perp|S_2|chi>|``:
    ``sqrt(p) cos(t/2) sin^3(t/2) (1 - sqrt(1-p))``. For a qubit this equals
    ``dE_1 dE_2`` because both deviation vectors lie along ``psi_perp``."""
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return math.sqrt(p) * c * s**3 * (1 - math.sqrt(1 - p))


def amplitude_damping_lower_printed(theta: float, phi: float, p: float) -> float:
    """``2 cos(phi) cos^2(t/2) sin^4(t/2) sqrt(p) (1 - sqrt(1-p))`` as
    published; it does not equal the weak-value expression it is meant to
    evaluate (see :func:`amplitude_damping_lower`)."""
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return 2 * math.cos(phi) * c * c * s**4 * math.sqrt(p) * (1 - math.sqrt(1 - p))


@dataclass(frozen=True)
class Fig2Row:
    p: float
    lower: float
    product: float
    upper: float
    lower_printed: float


def fig2_sweep(theta: float = math.pi / 2, phi: float = math.pi / 4, p_grid=None) -> list[Fig2Row]:
    """Rows ``(p, lower, product, upper)`` for the amplitude-damping channel.

    ``lower`` is the weak-value bound computed from the polar factors; the
    published closed form is carried alongside as ``lower_printed``.
    """
    if p_grid is None:
        p_grid = np.linspace(0.0, 1.0, 101)
    psi = bloch_qubit(theta, phi)
    rows = []
    for p in p_grid:
        p = float(p)
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"p={p} outside [0, 1]")
        b = two_kraus_bounds(amplitude_damping(p), psi)
        printed = amplitude_damping_lower_printed(theta, phi, p)
        if b.middle < printed - ORDER_SLACK:
            raise InvariantViolation("two-Kraus ordering (published lower bound)", f"p={p}")
        rows.append(Fig2Row(p, b.lower, b.middle, b.upper, printed))
    return rows


def random_channel(dim: int, n_kraus: int, rng: np.random.Generator) -> KrausChannel:
    """Kraus operators cut from a random isometry ``C^dim -> C^(dim*n_kraus)``."""
    x = rng.normal(size=(dim * n_kraus, dim)) + 1j * rng.normal(size=(dim * n_kraus, dim))
    q, r = np.linalg.qr(x)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    return KrausChannel(tuple(q[k * dim : (k + 1) * dim, :] for k in range(n_kraus)))
