"""Dense Hermitian linear algebra primitives.

Small wrappers around LAPACK (via numpy) plus the reflection construction
used to build worst-case preconditioners.  Everything works for real and
complex inputs; real data stays real.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "NotHermitianError",
    "NotPositiveDefiniteError",
    "hybrid_tol",
    "hermitian_part",
    "is_hermitian",
    "require_hermitian",
    "eig_hermitian",
    "cholesky",
    "householder_mapping",
    "spectral_norm",
    "angle_between",
    "unit",
    "proportionality_defect",
]


class NotHermitianError(ValueError):
    """Input matrix is not Hermitian within tolerance."""


class NotPositiveDefiniteError(ValueError):
    """Input matrix is not positive definite."""


def hybrid_tol(scale: float, tol: float = 1e-12) -> float:
    """Absolute-relative hybrid tolerance tol * max(1, scale)."""
    return tol * max(1.0, float(scale))


def hermitian_part(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


def is_hermitian(m: np.ndarray, tol: float = 1e-12) -> bool:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    defect = np.linalg.norm(m - m.conj().T)
    return defect <= hybrid_tol(np.linalg.norm(m), tol)


def require_hermitian(m: np.ndarray, tol: float = 1e-12, what: str = "matrix") -> np.ndarray:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotHermitianError(f"{what} must be square, got shape {m.shape}")
    if not is_hermitian(m, tol):
        raise NotHermitianError(f"{what} is not Hermitian within tolerance")
    return hermitian_part(m)


def eig_hermitian(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns (eigenvalues, eigenvectors) with real eigenvalues sorted in
    decreasing order and orthonormal eigenvector columns, so that
    m @ vectors[:, k] = values[k] * vectors[:, k].
    """
    m = require_hermitian(m)
    values, vectors = np.linalg.eigh(m)
    return values[::-1].copy(), vectors[:, ::-1].copy()


def cholesky(m: np.ndarray) -> np.ndarray:
    """Lower-triangular L with m = L @ L^H; errors if m is not Hermitian
    positive definite."""
    m = require_hermitian(m)
    try:
        return np.linalg.cholesky(m)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError("matrix is not positive definite") from exc


def _first_axis_not_parallel(u: np.ndarray) -> int:
    nu = np.linalg.norm(u)
    for k in range(u.shape[0]):
        if abs(u[k]) < (1.0 - 1e-12) * nu:
            return k
    return 0  # unreachable for dim >= 2; dim 1 has no orthogonal direction


def householder_mapping(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Hermitian involution H (reflection) with H @ u = v.

    Requires ||u|| = ||v|| (within 1e-12 relative) and a real inner product
    (v, u); no Hermitian reflection exists otherwise.  When u and v are
    nearly parallel the generic construction cancels catastrophically, so
    the reflection is taken about a deterministic direction orthogonal to
    u instead (the first coordinate axis not parallel to u, orthogonalized
    against u); u is then a fixed point and H @ u = v still holds to the
    accuracy permitted by the tiny angle.
    """
    u = np.asarray(u)
    v = np.asarray(v)
    if u.shape != v.shape or u.ndim != 1:
        raise ValueError("u and v must be vectors of equal length")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        raise ValueError("u and v must be nonzero")
    if abs(nu - nv) > 1e-12 * max(nu, nv):
        raise ValueError("u and v must have equal norms")
    ip = complex(np.vdot(v, u))
    if abs(ip.imag) > 1e-12 * nu * nv:
        raise ValueError("inner product (v, u) must be real for a Hermitian reflection")

    out_dtype = np.result_type(u.dtype, v.dtype, np.float64)
    eye = np.eye(u.shape[0], dtype=out_dtype)
    # signed angle: small only for u close to +v
    cos_signed = np.clip(ip.real / (nu * nv), -1.0, 1.0)
    if np.arccos(cos_signed) < 1e-8:
        if u.shape[0] == 1:
            return eye
        k = _first_axis_not_parallel(u)
        q = -u * (np.conj(u[k]) / (nu * nu))
        q[k] += 1.0
        q = q / np.linalg.norm(q)
        return eye - 2.0 * np.outer(q, q.conj())

    n = u - v
    return eye - (2.0 / np.vdot(n, n).real) * np.outer(n, n.conj())


def spectral_norm(m: np.ndarray) -> float:
    """Largest singular value."""
    return float(np.linalg.norm(np.asarray(m), 2))


def angle_between(x: np.ndarray, y: np.ndarray) -> float:
    """Principal angle in [0, pi/2]: arccos(|(x, y)| / (||x|| ||y||)).

    Evaluated through the half-angle identity
    2 atan2(||u - v||, ||u + v||) on phase-aligned unit vectors, which is
    accurate to machine precision even for tiny angles where the direct
    arccos route loses half the digits.
    """
    nx = np.linalg.norm(x)
    ny = np.linalg.norm(y)
    if nx == 0.0 or ny == 0.0:
        raise ValueError("angle undefined for zero vector")
    u = np.asarray(x) / nx
    v = np.asarray(y) / ny
    inner = np.vdot(u, v)
    mag = abs(inner)
    if mag == 0.0:
        return math.pi / 2.0
    # rotate v so that (u, v) becomes |inner| >= 0; the principal angle is
    # then the plain angle between u and the aligned v
    v = v * (inner.conjugate() / mag)
    return float(
        2.0 * math.atan2(np.linalg.norm(u - v), np.linalg.norm(u + v))
    )


def unit(x: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(x)
    if n == 0.0:
        raise ValueError("cannot normalize zero vector")
    return x / n


def proportionality_defect(u: np.ndarray, v: np.ndarray) -> float:
    """Relative distance of u from span{v}: ||u - c v|| / ||u|| with the
    least-squares coefficient c."""
    nu = np.linalg.norm(u)
    if nu == 0.0:
        return 0.0
    c = np.vdot(v, u) / np.vdot(v, v)
    return float(np.linalg.norm(u - c * v) / nu)
