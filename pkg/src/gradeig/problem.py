"""Hermitian pencil (B, A) construction, solution, and normalization.

A pencil is a pair of Hermitian matrices with A positive definite; its
generalized eigenvalues mu_1 >= ... >= mu_n and A-orthonormal eigenvectors
drive every convergence-rate quantity downstream.  The normalized form
replaces the pencil by a positive diagonal and the identity.
"""

from __future__ import annotations

import os.path
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.io

from . import linalg

__all__ = [
    "HermitianPencil",
    "SpectralData",
    "NormalizedProblem",
    "solve_pencil",
    "normalize_pencil",
    "perturb_to_simple",
    "random_problem",
    "parse_spectrum",
    "load_matrix",
    "load_pencil",
]


@dataclass(frozen=True)
class HermitianPencil:
    """Pencil B - mu * A with Hermitian B and Hermitian positive definite A."""

    b: np.ndarray
    a: np.ndarray

    def __post_init__(self):
        b = linalg.require_hermitian(np.asarray(self.b), what="B")
        a = linalg.require_hermitian(np.asarray(self.a), what="A")
        if b.shape != a.shape:
            raise ValueError("B and A must have matching shapes")
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "a", a)

    @property
    def dim(self) -> int:
        return self.b.shape[0]


@dataclass(frozen=True)
class SpectralData:
    """Solved spectrum: eigenvalues decreasing, eigenvector columns
    A-orthonormal, and the clustering tolerance used for interval logic."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    cluster_tol: float

    def __post_init__(self):
        ev = np.asarray(self.eigenvalues, dtype=float)
        if np.any(np.diff(ev) > 0):
            raise ValueError("eigenvalues must be sorted in decreasing order")
        object.__setattr__(self, "eigenvalues", ev)

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def mu_min(self) -> float:
        return float(self.eigenvalues[-1])


def default_cluster_tol(eigenvalues: np.ndarray) -> float:
    return 1e-12 * max(1.0, abs(float(eigenvalues[0])))


@dataclass(frozen=True)
class NormalizedProblem:
    """Shifted diagonal form of a pencil: D = diag(mu_k + shift) with A = I.

    ``transform`` maps normalized coordinates back to original ones
    (x = transform @ c); its inverse carries original vectors into the
    coordinates in which B acts as the stored diagonal.
    """

    diag: np.ndarray
    transform: np.ndarray
    shift: float

    @property
    def dim(self) -> int:
        return self.diag.shape[0]

    def to_normalized(self, x: np.ndarray) -> np.ndarray:
        return np.linalg.solve(self.transform, x)

    def to_original(self, c: np.ndarray) -> np.ndarray:
        return self.transform @ c


def solve_pencil(pencil: HermitianPencil) -> SpectralData:
    """Full solution of B v = mu A v.

    Eigenvalues come back in decreasing order; eigenvector columns satisfy
    V^H A V = I (A-orthonormal) and B v_k = mu_k A v_k.
    """
    try:
        values, vectors = scipy.linalg.eigh(pencil.b, pencil.a)
    except np.linalg.LinAlgError as exc:
        raise linalg.NotPositiveDefiniteError("A must be positive definite") from exc
    except ValueError as exc:
        raise linalg.NotPositiveDefiniteError(str(exc)) from exc
    values = values[::-1].copy()
    vectors = vectors[:, ::-1].copy()
    return SpectralData(values, vectors, default_cluster_tol(values))


def normalize_pencil(pencil: HermitianPencil, shift: float = 0.0) -> NormalizedProblem:
    """Diagonalize the pencil and apply a spectral shift.

    The shift must keep the whole spectrum nonnegative; the returned
    diagonal is mu_k + shift in decreasing order, and Rayleigh quotients
    transported through ``transform`` pick up exactly the shift.
    """
    data = solve_pencil(pencil)
    shifted = data.eigenvalues + shift
    if shifted[-1] < -linalg.hybrid_tol(abs(shifted[0])):
        raise ValueError(
            f"shift {shift} makes the spectrum negative (minimum {shifted[-1]:.6g})"
        )
    return NormalizedProblem(diag=shifted, transform=data.eigenvectors.copy(), shift=float(shift))


def perturb_to_simple(diag: np.ndarray, epsilon: float) -> np.ndarray:
    """Split clustered diagonal entries into simple positive ones.

    Each entry moves by at most epsilon (never downward), the result is
    strictly positive with pairwise gaps at least epsilon / (2 * dim), and
    the original positional order is preserved.
    """
    if epsilon <= 0.0:
        raise ValueError("epsilon must be positive")
    d = np.asarray(diag, dtype=float).copy()
    if d.ndim != 1:
        raise ValueError("diag must be a vector of diagonal entries")
    if np.any(d < 0):
        raise ValueError("diagonal entries must be nonnegative")
    n = d.shape[0]
    delta = epsilon / (2.0 * n)
    order = np.argsort(d, kind="stable")
    prev = 0.0
    for k in order:
        value = max(d[k], prev + delta)
        d[k] = value
        prev = value
    return d


def parse_spectrum(text: str) -> np.ndarray:
    """Parse a spectrum specification string into a decreasing array.

    Forms: ``list:2,1,0.5`` (explicit values), ``linspace:a,b,n`` (n evenly
    spaced values between a and b), ``logspace:a,b,n`` (n geometrically
    spaced values between the positive endpoint values a and b).
    """
    head, sep, body = text.partition(":")
    if not sep:
        raise ValueError(f"spectrum spec needs a 'kind:' prefix, got {text!r}")
    try:
        parts = [float(p) for p in body.split(",")] if body else []
    except ValueError as exc:
        raise ValueError(f"bad number in spectrum spec {text!r}") from exc
    if head == "list":
        if not parts:
            raise ValueError("list: spectrum needs at least one value")
        values = np.array(parts, dtype=float)
    elif head in ("linspace", "logspace"):
        if len(parts) != 3:
            raise ValueError(f"{head}: spectrum needs exactly a,b,n")
        a, b, n_float = parts
        n = int(n_float)
        if n != n_float or n < 1:
            raise ValueError(f"{head}: count must be a positive integer")
        if head == "linspace":
            values = np.linspace(a, b, n)
        else:
            if a <= 0 or b <= 0:
                raise ValueError("logspace: endpoints must be positive")
            values = np.geomspace(a, b, n)
    else:
        raise ValueError(f"unknown spectrum kind {head!r}")
    return np.sort(values)[::-1].copy()


def _unitary(dim: int, rng: np.random.Generator, complex_field: bool) -> np.ndarray:
    shape = (dim, dim)
    g = rng.standard_normal(shape)
    if complex_field:
        g = g + 1j * rng.standard_normal(shape)
    q, r = np.linalg.qr(g)
    # fix the phase so the factor is unique and the distribution unbiased
    d = np.diagonal(r)
    q = q * (d / np.abs(d))
    return q


def random_problem(
    dim: int,
    spectrum: np.ndarray | str,
    rng: np.random.Generator | int,
    *,
    complex_field: bool = False,
    random_a: bool = False,
    require_positive: bool = False,
) -> tuple[HermitianPencil, SpectralData]:
    """Seeded random pencil with a prescribed generalized spectrum.

    B is built as a conjugation of diag(spectrum); A is the identity, or a
    random Hermitian positive definite matrix when ``random_a`` is set.  The
    returned SpectralData holds the requested eigenvalues exactly along with
    the A-orthonormal eigenvectors used in the construction.
    """
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(int(rng))
    if isinstance(spectrum, str):
        spectrum = parse_spectrum(spectrum)
    values = np.sort(np.asarray(spectrum, dtype=float))[::-1].copy()
    if values.shape != (dim,):
        raise ValueError(f"spectrum length {values.shape[0]} does not match dim {dim}")
    if require_positive and values[-1] <= 0:
        raise ValueError("spectrum must be strictly positive")

    q = _unitary(dim, rng, complex_field)
    if random_a:
        g = rng.standard_normal((dim, dim))
        if complex_field:
            g = g + 1j * rng.standard_normal((dim, dim))
        a = linalg.hermitian_part(g @ g.conj().T) + dim * np.eye(dim)
        ell = np.linalg.cholesky(a)
        vectors = np.linalg.solve(ell.conj().T, q)
    else:
        a = np.eye(dim)
        vectors = q
    b = linalg.hermitian_part((a @ vectors) * values @ (vectors.conj().T @ a))
    pencil = HermitianPencil(b, a)
    data = SpectralData(values, vectors, default_cluster_tol(values))
    return pencil, data


def load_matrix(path: str) -> np.ndarray:
    """Read a dense or sparse Matrix Market file into a dense array."""
    if not os.path.exists(path):
        raise FileNotFoundError(f"cannot read matrix file {path!r}: no such file")
    try:
        m = scipy.io.mmread(path)
    except FileNotFoundError:
        raise
    except Exception as exc:
        raise OSError(f"cannot read matrix file {path!r}: {exc}") from exc
    if hasattr(m, "toarray"):
        m = m.toarray()
    return np.asarray(m)


def load_pencil(b_path: str, a_path: str | None = None) -> HermitianPencil:
    """Load B (and optionally A) from Matrix Market files; A defaults to
    the identity.  Hermitian symmetry declared in the file is verified."""
    b = load_matrix(b_path)
    a = load_matrix(a_path) if a_path is not None else np.eye(b.shape[0])
    return HermitianPencil(b, a)
