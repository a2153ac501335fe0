"""Dense complex linear algebra for small Hermitian / unitary matrix work.

Everything here operates on plain complex ndarrays. Matrices are small
(4x4 for the two-spin problem, general N supported), so clarity wins over
performance. All functions are pure; inputs are never mutated.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

HERMITICITY_TOL = 1e-12


class EigenSystem(NamedTuple):
    """Hermitian eigendecomposition: ``vectors[:, k]`` belongs to ``values[k]``.

    Eigenvalues are real and ascending; eigenvector columns are orthonormal
    with a deterministic phase (largest-magnitude component real positive).
    """

    values: np.ndarray
    vectors: np.ndarray


def as_cmatrix(m) -> np.ndarray:
    """Coerce to a square complex matrix, raising on non-square input."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    return a


def dagger(m) -> np.ndarray:
    """Conjugate transpose."""
    return np.asarray(m, dtype=complex).conj().T


def hermiticity_defect(m) -> float:
    """max |M - M'dagger'| over entries."""
    a = as_cmatrix(m)
    return float(np.abs(a - a.conj().T).max())


def require_hermitian(m, tol: float = HERMITICITY_TOL, name: str = "matrix") -> np.ndarray:
    a = as_cmatrix(m)
    defect = float(np.abs(a - a.conj().T).max())
    if defect > tol:
        raise ValueError(f"{name} is not Hermitian: max |M - M^dag| = {defect:.3e} > {tol:.1e}")
    return a


def herm_eigendecompose(m, tol: float = HERMITICITY_TOL) -> EigenSystem:
    """Eigendecompose a Hermitian matrix with a fixed phase convention.

    Eigenvalues come back ascending. Each eigenvector is rescaled by a unit
    phase so that its largest-magnitude component (first such index on ties)
    is real and positive, which makes the output deterministic.
    """
    a = require_hermitian(m, tol)
    values, vectors = np.linalg.eigh(a)
    vectors = vectors.copy()
    for k in range(vectors.shape[1]):
        col = vectors[:, k]
        i = int(np.argmax(np.abs(col)))
        pivot = col[i]
        if pivot != 0:
            vectors[:, k] = col * (pivot.conjugate() / abs(pivot))
    return EigenSystem(values=values, vectors=vectors)


def unitary_propagator(h, dt: float, tol: float = HERMITICITY_TOL) -> np.ndarray:
    """exp(-i H dt) for Hermitian H (rad/s) via eigendecomposition.

    Returns the identity exactly at dt = 0. Two Newton polar-correction steps,
    U <- U (3 I - U^dag U)/2, follow the spectral construction; without them
    the ~1e-15 orthonormality defect of the eigenvector matrix leaks a
    systematic trace drift of order 1e-16 per step into long propagations.
    """
    if not np.isfinite(dt):
        raise ValueError("dt must be finite")
    values, vectors = herm_eigendecompose(h, tol)
    if dt == 0.0:
        return np.eye(len(values), dtype=complex)
    phases = np.exp(-1j * values * dt)
    u = (vectors * phases) @ vectors.conj().T
    eye = 1.5 * np.eye(len(values))
    u = u @ (eye - 0.5 * (u.conj().T @ u))
    return u @ (eye - 0.5 * (u.conj().T @ u))


def trace_expectation(a, rho) -> complex:
    """Tr{A^dag rho}. Real up to roundoff when both arguments are Hermitian."""
    aa = as_cmatrix(a)
    rr = as_cmatrix(rho)
    if aa.shape != rr.shape:
        raise ValueError(f"dimension mismatch: {aa.shape} vs {rr.shape}")
    # Tr(A^dag B) = sum conj(A) * B, elementwise
    return complex(np.sum(aa.conj() * rr))
