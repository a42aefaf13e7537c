"""Geometric convergence machinery for the normalized problem (B positive,
A = I).

Centerpieces: the acute cone around B x that contains every preconditioned
iterate, the Rayleigh-quotient minimizer over that cone (found through a
scalar resolvent equation), the quadratic whose positive root parametrizes
the two-dimensional worst case, the Temple product bounding the residual
from below on a level set, and the contraction factors tying them together.

Diagonal operators are passed as 1-D arrays of (positive) diagonal entries;
a full Hermitian positive definite matrix is accepted where noted and is
handled by diagonalizing once.  All angle computations use the principal
angle |(x, y)| / (||x|| ||y||), so real and complex data behave identically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg

__all__ = [
    "AtEigenvectorError",
    "ConeSpec",
    "MinimizerResult",
    "AlphaRoots",
    "rayleigh",
    "residual",
    "cone_angle",
    "cone_minimizer",
    "alpha_quadratic",
    "sigma_factor",
    "sigma_of_alpha",
    "two_dim_coordinates",
    "temple_bound",
    "rayleigh_gradient",
    "gradient_norm",
    "finite_difference_gradient",
    "absolute_value_reduction",
    "span_representative",
    "sample_level_set",
]

EIGENVECTOR_RESIDUAL_TOL = 1e-12
SMALL_GAMMA_GUARD = 1e-12


class AtEigenvectorError(ValueError):
    """The construction degenerates at an eigenvector."""


def _apply(b: np.ndarray, x: np.ndarray) -> np.ndarray:
    b = np.asarray(b)
    return b * x if b.ndim == 1 else b @ x


def rayleigh(x: np.ndarray, b: np.ndarray, a: np.ndarray | None = None) -> float:
    """Rayleigh quotient (x, B x) / (x, A x); A defaults to the identity.
    B may be a 1-D array of diagonal entries or a full Hermitian matrix."""
    x = np.asarray(x)
    num = np.vdot(x, _apply(b, x)).real
    den = np.vdot(x, x).real if a is None else np.vdot(x, _apply(a, x)).real
    if den <= 0.0:
        raise ValueError("x must be nonzero (and A positive definite)")
    return float(num / den)


def residual(x: np.ndarray, b: np.ndarray, a: np.ndarray | None = None) -> np.ndarray:
    """Eigenvalue residual B x - mu(x) A x; orthogonal to x by construction."""
    mu = rayleigh(x, b, a)
    ax = x if a is None else _apply(a, x)
    return _apply(b, x) - mu * ax


@dataclass(frozen=True)
class ConeSpec:
    """Acute circular cone around axis = B x / ||B x||.

    ``opening_angle`` is arcsin(gamma ||B x - mu x|| / ||B x||) < pi/2;
    every admissible preconditioned step from x lands inside this cone.
    """

    axis: np.ndarray
    opening_angle: float
    gamma: float
    kappa: float


@dataclass(frozen=True)
class MinimizerResult:
    """Minimizer of the Rayleigh quotient over a cone boundary.

    w is unit and satisfies (B + alpha I) w proportional to B x; alpha is
    math.inf for the degenerate gamma -> 0 cone collapsing onto its axis.
    """

    w: np.ndarray
    alpha: float
    mu_w: float


def _check_positive_diag(b: np.ndarray) -> np.ndarray:
    b = np.asarray(b, dtype=float)
    if b.ndim != 1:
        raise ValueError("diagonal operator must be a 1-D array of entries")
    if np.any(b <= 0.0):
        raise ValueError("diagonal entries must be strictly positive")
    return b


def cone_angle(x: np.ndarray, b: np.ndarray, gamma: float) -> ConeSpec:
    """Opening angle of the iteration cone at x for preconditioner quality
    gamma in [0, 1]; gamma = 1 gives the angle between x and B x itself."""
    if not 0.0 <= gamma <= 1.0:
        raise ValueError("gamma must lie in [0, 1]")
    x = np.asarray(x)
    if np.linalg.norm(x) == 0.0:
        raise ValueError("x must be nonzero")
    bx = _apply(b, x)
    mu = rayleigh(x, b)
    if mu <= 0.0:
        raise ValueError("operator must be positive definite")
    r = bx - mu * x
    s = gamma * np.linalg.norm(r) / np.linalg.norm(bx)
    phi = math.asin(min(s, 1.0))
    return ConeSpec(axis=np.asarray(linalg.unit(bx)), opening_angle=phi, gamma=float(gamma), kappa=mu)


def cone_minimizer(
    x: np.ndarray,
    b: np.ndarray,
    gamma: float,
    *,
    angle_tol: float = 1e-12,
) -> MinimizerResult:
    """Rayleigh-quotient minimizer over the cone of quality gamma at x.

    Solves angle((B + alpha I)^{-1} B x, B x) = opening_angle for alpha > 0
    by bisection with geometric bracket growth; the minimizer is the unit
    resolvent vector at the root.  For gamma below 1e-12 the cone collapses
    and the axis direction is returned with alpha flagged infinite.
    Raises AtEigenvectorError when x is (numerically) an eigenvector.
    """
    b_arr = np.asarray(b)
    if b_arr.ndim == 2:
        values, vectors = linalg.eig_hermitian(b_arr)
        if values[-1] <= 0.0:
            raise ValueError("operator must be positive definite")
        inner = cone_minimizer(vectors.conj().T @ np.asarray(x), values, gamma, angle_tol=angle_tol)
        return MinimizerResult(w=vectors @ inner.w, alpha=inner.alpha, mu_w=inner.mu_w)

    bd = _check_positive_diag(b_arr)
    if not 0.0 <= gamma < 1.0:
        raise ValueError("gamma must lie in [0, 1)")
    x = np.asarray(x)
    bx = bd * x
    nbx = np.linalg.norm(bx)
    r = residual(x, bd)
    if np.linalg.norm(r) <= EIGENVECTOR_RESIDUAL_TOL * nbx:
        raise AtEigenvectorError("x is an eigenvector; the cone has no interior")
    if gamma < SMALL_GAMMA_GUARD:
        w = linalg.unit(bx)
        return MinimizerResult(w=np.asarray(w), alpha=math.inf, mu_w=rayleigh(w, bd))

    phi = cone_angle(x, bd, gamma).opening_angle

    def boundary_angle(alpha: float) -> float:
        return linalg.angle_between(bx / (bd + alpha), bx)

    # at alpha = 0 the resolvent returns x itself, whose angle to B x
    # exceeds phi; the angle decays to 0 as alpha grows
    lo = 0.0
    hi = max(1.0, float(bd.max()))
    for _ in range(200):
        if boundary_angle(hi) < phi:
            break
        lo = hi
        hi *= 2.0
    else:
        raise RuntimeError("failed to bracket the cone boundary angle equation")

    alpha = 0.5 * (lo + hi)
    for _ in range(220):
        alpha = 0.5 * (lo + hi)
        a_mid = boundary_angle(alpha)
        if abs(a_mid - phi) <= 0.1 * angle_tol:
            break
        if a_mid > phi:
            lo = alpha
        else:
            hi = alpha
        if hi - lo <= 1e-17 * (1.0 + hi):
            alpha = 0.5 * (lo + hi)
            break

    w = linalg.unit(bx / (bd + alpha))
    return MinimizerResult(w=np.asarray(w), alpha=float(alpha), mu_w=rayleigh(w, bd))


@dataclass(frozen=True)
class AlphaRoots:
    """Roots of the quadratic locating the two-dimensional cone extrema.

    For x in the invariant plane of the eigenvalue pair (mu_i, mu_i1) with
    mu(x) = kappa, the minimizer parameter is alpha_plus > 0 and the
    maximizer parameter is alpha_minus < 0.
    """

    alpha_plus: float
    alpha_minus: float
    coefficients: tuple[float, float, float]


def alpha_quadratic(kappa: float, mu_i: float, mu_i1: float, gamma: float) -> AlphaRoots:
    """Quadratic a alpha^2 + b alpha + c = 0 for the 2-D cone extrema.

    a = gamma^2 (kappa (mu_i + mu_i1) - mu_i mu_i1), b = 2 gamma^2 kappa
    mu_i mu_i1, c = -(1 - gamma^2) mu_i^2 mu_i1^2.  The roots are always
    real with opposite signs; the stable quadratic formula is used.
    """
    if not mu_i > mu_i1 > 0.0:
        raise ValueError("need mu_i > mu_i1 > 0")
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must lie in (0, 1)")
    if not mu_i1 < kappa < mu_i:
        raise ValueError("kappa must lie strictly between mu_i1 and mu_i")
    g2 = gamma * gamma
    a = g2 * (kappa * (mu_i + mu_i1) - mu_i * mu_i1)
    b = 2.0 * g2 * kappa * mu_i * mu_i1
    c = -(1.0 - g2) * (mu_i * mu_i1) ** 2
    disc = b * b - 4.0 * a * c
    q = -0.5 * (b + math.copysign(math.sqrt(disc), b))
    r1, r2 = q / a, c / q
    alpha_plus, alpha_minus = max(r1, r2), min(r1, r2)
    return AlphaRoots(alpha_plus=alpha_plus, alpha_minus=alpha_minus, coefficients=(a, b, c))


def sigma_factor(mu_i: float, mu_i1: float, mu_min: float, gamma: float) -> float:
    """Per-step contraction factor sigma = 1 - (1 - gamma) (mu_i - mu_i1)
    / (mu_i - mu_min).  Degenerate gap mu_i = mu_i1 returns 1 (no
    contraction)."""
    if not 0.0 <= gamma < 1.0:
        raise ValueError("gamma must lie in [0, 1)")
    if not mu_i >= mu_i1 >= mu_min:
        raise ValueError("need mu_i >= mu_i1 >= mu_min")
    if mu_i == mu_min:
        raise ValueError("mu_i must exceed mu_min")
    if mu_i == mu_i1:
        return 1.0
    return 1.0 - (1.0 - gamma) * (mu_i - mu_i1) / (mu_i - mu_min)


def sigma_of_alpha(alpha: float, mu_i: float, mu_i1: float) -> float:
    """Contraction factor realized by the 2-D minimizer with parameter
    alpha > 0: (mu_i1 / mu_i) (mu_i + alpha) / (mu_i1 + alpha); strictly
    decreasing in alpha, with limit mu_i1 / mu_i as alpha -> inf."""
    if not mu_i > mu_i1 > 0.0:
        raise ValueError("need mu_i > mu_i1 > 0")
    if math.isinf(alpha):
        return mu_i1 / mu_i
    if alpha <= 0.0:
        raise ValueError("alpha must be positive")
    return (mu_i1 / mu_i) * (mu_i + alpha) / (mu_i1 + alpha)


def two_dim_coordinates(mu_x: float, mu_i: float, mu_i1: float) -> tuple[float, float]:
    """Squared eigenvector weights of a unit vector in the invariant plane
    of (mu_i, mu_i1) with Rayleigh quotient mu_x: (|c_i|^2, |c_i1|^2)."""
    if mu_i <= mu_i1:
        raise ValueError("need mu_i > mu_i1")
    if not mu_i1 <= mu_x <= mu_i:
        raise ValueError("mu_x must lie in [mu_i1, mu_i]")
    gap = mu_i - mu_i1
    return (mu_x - mu_i1) / gap, (mu_i - mu_x) / gap


def temple_bound(kappa: float, mu_i: float, mu_i1: float) -> float:
    """Lower bound (mu_i - kappa)(kappa - mu_i1) for the squared residual
    ||B x - kappa x||^2 / ||x||^2 of any x with mu(x) = kappa in
    [mu_i1, mu_i]; attained exactly on the invariant plane."""
    if not mu_i1 <= kappa <= mu_i:
        raise ValueError("kappa must lie in [mu_i1, mu_i]")
    return (mu_i - kappa) * (kappa - mu_i1)


def rayleigh_gradient(x: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Gradient of the Rayleigh quotient: 2 (B x - mu(x) x) / (x, x).
    For complex x this packs the derivatives with respect to real and
    imaginary parts into one complex vector."""
    x = np.asarray(x)
    den = np.vdot(x, x).real
    if den == 0.0:
        raise ValueError("x must be nonzero")
    return 2.0 * residual(x, b) / den


def gradient_norm(x: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(rayleigh_gradient(x, b)))


def finite_difference_gradient(x: np.ndarray, b: np.ndarray, h: float = 1e-6) -> np.ndarray:
    """Central-difference gradient of mu; independent check of
    rayleigh_gradient.  Complex inputs are differentiated with respect to
    real and imaginary parts separately."""
    if h <= 0.0:
        raise ValueError("h must be positive")
    x = np.asarray(x)
    is_complex = np.iscomplexobj(x)
    out = np.zeros(x.shape, dtype=complex if is_complex else float)
    for k in range(x.shape[0]):
        e = np.zeros(x.shape, dtype=x.dtype)
        e[k] = h
        out[k] = (rayleigh(x + e, b) - rayleigh(x - e, b)) / (2.0 * h)
        if is_complex:
            e[k] = 1j * h
            out[k] += 1j * (rayleigh(x + e, b) - rayleigh(x - e, b)) / (2.0 * h)
    return out


def absolute_value_reduction(x: np.ndarray) -> np.ndarray:
    """Componentwise magnitude vector |x|; for positive diagonal operators
    it preserves the Rayleigh quotient, the residual norm, and hence every
    cone angle."""
    return np.abs(np.asarray(x))


def span_representative(b: np.ndarray, index: int, kappa: float) -> np.ndarray:
    """Unit vector supported on coordinates (index, index + 1) with
    prescribed Rayleigh quotient kappa; b must be sorted decreasing."""
    bd = _check_positive_diag(b)
    if not 0 <= index < bd.shape[0] - 1:
        raise ValueError("index must address an adjacent eigenvalue pair")
    top, bottom = two_dim_coordinates(kappa, float(bd[index]), float(bd[index + 1]))
    x = np.zeros(bd.shape[0])
    x[index] = math.sqrt(top)
    x[index + 1] = math.sqrt(bottom)
    return x


def sample_level_set(
    b: np.ndarray,
    index: int,
    kappa: float,
    rng: np.random.Generator,
    *,
    noise: float = 0.3,
    complex_field: bool = False,
    tail_only: bool = False,
) -> np.ndarray:
    """Random unit vector with exactly mu(x) = kappa in the spectral
    interval (b[index + 1], b[index]); b sorted decreasing.

    Mixes the invariant-plane representative with a random direction
    supported off the pair, then rebalances the pair weights so the
    Rayleigh quotient is preserved; the noise weight shrinks automatically
    until the rebalancing is feasible.

    With ``tail_only`` the noise direction is restricted to coordinates
    below the pair (indices > index + 1), so the sample has no weight on
    eigenvalues above b[index].  The cone minimizer of such a sample is
    guaranteed to stay inside the open interval (kappa, b[index]); generic
    samples can push the minimizer above b[index].
    """
    bd = _check_positive_diag(b)
    n = bd.shape[0]
    if not 0 <= index < n - 1:
        raise ValueError("index must address an adjacent eigenvalue pair")
    mu_i = float(bd[index])
    mu_i1 = float(bd[index + 1])
    if not mu_i1 < kappa < mu_i:
        raise ValueError("kappa must lie strictly inside the interval")
    free = n - index - 2 if tail_only else n - 2
    if free <= 0 or noise == 0.0:
        return span_representative(bd, index, kappa).astype(complex if complex_field else float)

    u = rng.standard_normal(n)
    if complex_field:
        u = u + 1j * rng.standard_normal(n)
    if tail_only:
        u[: index + 2] = 0.0
    u[index] = 0.0
    u[index + 1] = 0.0
    nu = np.linalg.norm(u)
    if nu == 0.0:
        return span_representative(bd, index, kappa).astype(complex if complex_field else float)
    u = u / nu
    mu_u = rayleigh(u, bd)

    tau = abs(noise) * rng.uniform(0.25, 1.0)
    for _ in range(200):
        t2 = tau * tau
        top = (kappa - t2 * mu_u - (1.0 - t2) * mu_i1) / (mu_i - mu_i1)
        bottom = (1.0 - t2) - top
        if top > 0.0 and bottom > 0.0:
            break
        tau *= 0.5
    else:
        return span_representative(bd, index, kappa).astype(complex if complex_field else float)

    x = tau * u.astype(complex if complex_field else float)
    x[index] += math.sqrt(top)
    x[index + 1] += math.sqrt(bottom)
    return x
