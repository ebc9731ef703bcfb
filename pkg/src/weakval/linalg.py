"""Dense complex linear algebra: adjoints, Hermitian eigensystems, SVD,
PSD square roots and the polar decomposition.

Matrices are plain ``numpy`` arrays of dtype ``complex128``; states are 1-D
complex arrays of unit Euclidean norm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NegativeEigenvalue, NotHermitian, NotNormalized

HERMITIAN_RTOL = 1e-10
EIG_CLAMP = 1e-10
NORM_TOL = 1e-12


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def as_state(v, tol: float = NORM_TOL) -> np.ndarray:
    """Coerce ``v`` to a complex vector and check it has unit norm."""
    psi = np.asarray(v, dtype=complex).reshape(-1)
    nrm = np.linalg.norm(psi)
    if abs(nrm - 1.0) > tol:
        raise NotNormalized(f"state norm is {nrm!r}, expected 1")
    return psi


def normalize(v) -> np.ndarray:
    psi = np.asarray(v, dtype=complex).reshape(-1)
    nrm = np.linalg.norm(psi)
    if nrm == 0:
        raise ValueError("cannot normalize the zero vector")
    return psi / nrm


def basis_state(dim: int, k: int) -> np.ndarray:
    e = np.zeros(dim, dtype=complex)
    e[k] = 1.0
    return e


def adjoint(m) -> np.ndarray:
    return np.asarray(m, dtype=complex).conj().T


def is_hermitian(m, rtol: float = HERMITIAN_RTOL) -> bool:
    m = np.asarray(m, dtype=complex)
    scale = max(1.0, float(np.abs(m).max(initial=0.0)))
    return float(np.abs(m - m.conj().T).max(initial=0.0)) <= rtol * scale


def _first_nonzero_phases(cols: np.ndarray, tol: float = 1e-14) -> np.ndarray:
    """Unit phases that make the first nonzero entry of each column real positive."""
    phases = np.ones(cols.shape[1], dtype=complex)
    for k in range(cols.shape[1]):
        col = cols[:, k]
        scale = max(np.abs(col).max(initial=0.0), 1.0)
        nz = np.flatnonzero(np.abs(col) > tol * scale)
        if nz.size:
            z = col[nz[0]]
            phases[k] = np.conj(z) / abs(z)
    return phases


def hermitian_eig(m) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix.

    Returns
    -------
    eigenvalues : ndarray of float, ascending
    eigenvectors : ndarray, eigenvectors as columns, first nonzero component
        of each column real and positive.

    Raises
    ------
    NotHermitian
        If ``max|m - m^dagger|`` exceeds ``1e-10 * max(1, max|m|)``.
    """
    m = as_matrix(m)
    if not is_hermitian(m):
        raise NotHermitian("matrix is not Hermitian within tolerance")
    herm = 0.5 * (m + m.conj().T)
    w, v = np.linalg.eigh(herm)
    v = v * _first_nonzero_phases(v)
    return w, v


def psd_sqrt(m) -> np.ndarray:
    """Unique positive semi-definite square root of a Hermitian PSD matrix.

    Eigenvalues in ``[-1e-10, 0)`` are treated as rounding noise and clamped
    to zero; anything more negative raises :class:`NegativeEigenvalue`.
    """
    w, v = hermitian_eig(m)
    if w.size and w.min() < -EIG_CLAMP:
        raise NegativeEigenvalue(f"smallest eigenvalue {w.min():.3e} < -{EIG_CLAMP}")
    w = np.clip(w, 0.0, None)
    root = (v * np.sqrt(w)) @ v.conj().T
    return 0.5 * (root + root.conj().T)


def svd(a) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Full SVD ``a = W @ diag(singulars) @ V^dagger``.

    Singular values are descending. Columns of ``V`` follow the
    first-nonzero-component-real-positive convention; the matching columns of
    ``W`` carry the same phase so the product is unchanged. Columns of ``W``
    belonging to zero singular values are fixed by the same convention
    independently, so the completion does not depend on the LAPACK build.
    """
    a = as_matrix(a)
    w, sv, vh = np.linalg.svd(a)
    v = vh.conj().T
    ph = _first_nonzero_phases(v)
    w = w * ph
    null = sv <= sv.max(initial=0.0) * a.shape[0] * np.finfo(float).eps
    if null.any():
        w[:, null] = w[:, null] * _first_nonzero_phases(w[:, null])
    return w, sv, v * ph


@dataclass(frozen=True)
class PolarFactors:
    """``A = unitary @ psd = left_psd @ unitary``."""

    unitary: np.ndarray
    psd: np.ndarray
    left_psd: np.ndarray

    def right_product(self) -> np.ndarray:
        return self.unitary @ self.psd

    def left_product(self) -> np.ndarray:
        return self.left_psd @ self.unitary


def polar_decompose(a) -> PolarFactors:
    """Polar decomposition through the SVD.

    With ``A = W S V^dagger`` this returns ``U = W V^dagger``,
    ``R = V S V^dagger`` and ``S = W S W^dagger``. For singular ``A`` the
    unitary factor is not unique and the SVD product is returned as a
    deterministic completion.
    """
    w, sv, v = svd(a)
    u = w @ v.conj().T
    r = (v * sv) @ v.conj().T
    s = (w * sv) @ w.conj().T
    return PolarFactors(
        unitary=u,
        psd=0.5 * (r + r.conj().T),
        left_psd=0.5 * (s + s.conj().T),
    )


def random_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    return normalize(rng.normal(size=dim) + 1j * rng.normal(size=dim))


def random_matrix(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Complex Gaussian matrix, optionally forced to the given rank."""
    x = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    if rank is not None and rank < dim:
        w, sv, vh = np.linalg.svd(x)
        sv[rank:] = 0.0
        x = (w * sv) @ vh
    return x


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(random_matrix(dim, rng))
    d = np.diag(r)
    return q * (d / np.abs(d))
