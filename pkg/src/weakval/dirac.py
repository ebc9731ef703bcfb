"""Products of projectors onto two orthonormal bases and the discrete Dirac
quasiprobability ``<psi|Pi_i(B) Pi_j(C)|psi>``.

``Pi_i(B) Pi_j(C) = U R`` with ``R = |<psi_i|phi_j>| |phi_j><phi_j|`` and the
shift unitary ``U = e^{i eta} sum_k |psi_{k+m}><phi_k|`` (indices mod ``d``,
``m = i - j``), so each point is a weak value of ``R`` times an overlap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, IndexOutOfRange, NotOrthogonal, ZeroOverlap
from .linalg import as_state
from .weak import weak_route

ORTHO_TOL = 1e-10
ZERO_OVERLAP = 1e-10


def _as_basis(vectors) -> np.ndarray:
    """Columns of the returned matrix are the basis vectors."""
    if isinstance(vectors, np.ndarray) and vectors.ndim == 2:
        basis = np.asarray(vectors, dtype=complex)
    else:
        basis = np.column_stack([np.asarray(v, dtype=complex).reshape(-1) for v in vectors])
    d = basis.shape[0]
    if basis.shape != (d, d):
        raise DimensionMismatch(f"need {d} vectors of length {d}, got shape {basis.shape}")
    if np.abs(basis.conj().T @ basis - np.eye(d)).max() > ORTHO_TOL:
        raise NotOrthogonal("basis is not orthonormal")
    return basis


@dataclass(frozen=True)
class ProjectorPair:
    """``basis_b``/``basis_c`` hold the vectors ``psi_k``/``phi_k`` as columns."""

    basis_b: np.ndarray
    basis_c: np.ndarray
    i: int = 0
    j: int = 0

    def __post_init__(self):
        b = _as_basis(self.basis_b)
        c = _as_basis(self.basis_c)
        if b.shape != c.shape:
            raise DimensionMismatch(f"bases of dimension {b.shape[0]} and {c.shape[0]}")
        d = b.shape[0]
        if not (0 <= self.i < d and 0 <= self.j < d):
            raise IndexOutOfRange(f"(i, j) = ({self.i}, {self.j}) outside 0..{d - 1}")
        object.__setattr__(self, "basis_b", b)
        object.__setattr__(self, "basis_c", c)

    @property
    def dim(self) -> int:
        return self.basis_b.shape[0]

    @property
    def overlap(self) -> complex:
        """``<psi_i|phi_j>``."""
        return complex(np.vdot(self.basis_b[:, self.i], self.basis_c[:, self.j]))

    def at(self, i: int, j: int) -> ProjectorPair:
        return ProjectorPair(self.basis_b, self.basis_c, i, j)


def computational_basis(d: int) -> np.ndarray:
    return np.eye(d, dtype=complex)


def fourier_basis(d: int) -> np.ndarray:
    k = np.arange(d)
    return np.exp(2j * np.pi * np.outer(k, k) / d) / np.sqrt(d)


def projector_product(pp: ProjectorPair) -> np.ndarray:
    """``|psi_i><psi_i|phi_j><phi_j|`` formed directly."""
    psi_i = pp.basis_b[:, pp.i]
    phi_j = pp.basis_c[:, pp.j]
    return pp.overlap * np.outer(psi_i, phi_j.conj())


def projector_product_unitary(pp: ProjectorPair) -> np.ndarray:
    """Shift unitary mapping ``phi_k`` to ``e^{i eta} psi_{k+m}``, ``m = (i - j) mod d``.

    Raises
    ------
    ZeroOverlap
        If ``|<psi_i|phi_j>| <= 1e-10``.
    """
    ov = pp.overlap
    if abs(ov) <= ZERO_OVERLAP:
        raise ZeroOverlap(f"|<psi_{pp.i}|phi_{pp.j}>| = {abs(ov):.3e}")
    m = (pp.i - pp.j) % pp.dim
    shifted = np.roll(pp.basis_b, -m, axis=1)  # column k is psi_{k+m}
    return (ov / abs(ov)) * shifted @ pp.basis_c.conj().T


def projector_product_psd(pp: ProjectorPair) -> np.ndarray:
    phi_j = pp.basis_c[:, pp.j]
    return abs(pp.overlap) * np.outer(phi_j, phi_j.conj())


def _direct(pp: ProjectorPair, psi: np.ndarray) -> complex:
    psi_i = pp.basis_b[:, pp.i]
    phi_j = pp.basis_c[:, pp.j]
    return complex(np.vdot(psi, psi_i) * pp.overlap * np.vdot(phi_j, psi))


def _check_state(pp: ProjectorPair, psi) -> np.ndarray:
    psi = as_state(psi)
    if psi.shape[0] != pp.dim:
        raise DimensionMismatch(f"state dim {psi.shape[0]} != basis dim {pp.dim}")
    return psi


def _weak_point(pp: ProjectorPair, psi: np.ndarray):
    u = projector_product_unitary(pp)
    return weak_route(projector_product_psd(pp), psi, u.conj().T @ psi, _direct(pp, psi))


def dirac_distribution_point(pp: ProjectorPair, psi) -> complex:
    """``<psi|Pi_i(B) Pi_j(C)|psi>`` via the weak value of ``R`` with
    post-selection ``U^dagger psi``.

    When ``U^dagger psi`` is orthogonal to ``psi`` the value is computed
    directly.

    Raises
    ------
    ZeroOverlap
        If ``<psi_i|phi_j> = 0``; the unitary is undefined there.
    """
    psi = _check_state(pp, psi)
    return _weak_point(pp, psi).reconstructed_expectation


@dataclass(frozen=True)
class DiracTable:
    values: np.ndarray  # [i, j] entry is <psi|Pi_i(B) Pi_j(C)|psi>
    direct: np.ndarray
    protocol_defined: np.ndarray  # False where <psi_i|phi_j> = 0
    weak_fallback: np.ndarray  # True where U^dagger psi is orthogonal to psi

    def marginal_b(self) -> np.ndarray:
        """``sum_j``: ``|<psi_i|psi>|^2``."""
        return self.values.sum(axis=1)

    def marginal_c(self) -> np.ndarray:
        """``sum_i``: ``|<phi_j|psi>|^2``."""
        return self.values.sum(axis=0)


def dirac_distribution_full(basis_b, basis_c, psi) -> DiracTable:
    """All ``d^2`` points. Points with ``<psi_i|phi_j> = 0`` are exactly zero
    and marked ``protocol_defined=False``."""
    pp = ProjectorPair(basis_b, basis_c)
    psi = _check_state(pp, psi)
    d = pp.dim
    values = np.zeros((d, d), dtype=complex)
    direct = np.zeros((d, d), dtype=complex)
    defined = np.ones((d, d), dtype=bool)
    fallback = np.zeros((d, d), dtype=bool)
    for i in range(d):
        for j in range(d):
            point = pp.at(i, j)
            direct[i, j] = _direct(point, psi)
            if abs(point.overlap) <= ZERO_OVERLAP:
                defined[i, j] = False
                continue
            res = _weak_point(point, psi)
            values[i, j] = res.reconstructed_expectation
            fallback[i, j] = res.fallback
    return DiracTable(values, direct, defined, fallback)
