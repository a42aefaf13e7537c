"""Preconditioners for the pencil iteration and their quality measure.

Quality is the smallest gamma >= 0 with (1 - gamma) (z, T^{-1} z) <=
(z, A z) <= (1 + gamma) (z, T^{-1} z) for all z; admissible means
gamma < 1.  Besides random admissible draws, this module constructs the
provably worst admissible preconditioner of a given quality at a given
vector: a scaled reflection that sends the step straight to the cone
minimizer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg, theory

__all__ = [
    "Preconditioner",
    "measure_gamma",
    "identity_preconditioner",
    "random_admissible",
    "worst_case",
    "load_preconditioner",
]


@dataclass(frozen=True)
class Preconditioner:
    """Hermitian positive definite T with its measured quality."""

    t: np.ndarray
    gamma_measured: float
    tag: str = ""

    @property
    def dim(self) -> int:
        return self.t.shape[0]

    @property
    def admissible(self) -> bool:
        return self.gamma_measured < 1.0


def measure_gamma(t: np.ndarray, a: np.ndarray) -> float:
    """Smallest gamma >= 0 for the two-sided spectral equivalence of A and
    T^{-1}.

    With lambda the eigenvalues of the pencil (A, T^{-1}) -- equivalently
    of L^H A L for T = L L^H -- the measure is max(1 - lambda_min,
    lambda_max - 1).  For A = I this is the spectral norm of I - T.
    Values >= 1 mean T is not admissible for the convergence theory.
    """
    ell = linalg.cholesky(np.asarray(t))
    a = linalg.require_hermitian(np.asarray(a), what="A")
    m = ell.conj().T @ a @ ell
    evs = np.linalg.eigvalsh(linalg.hermitian_part(m))
    return float(max(1.0 - evs[0], evs[-1] - 1.0, 0.0))


def identity_preconditioner(dim: int) -> Preconditioner:
    return Preconditioner(t=np.eye(dim), gamma_measured=0.0, tag="identity")


def random_admissible(
    dim: int,
    gamma: float,
    rng: np.random.Generator | int,
    *,
    complex_field: bool = False,
) -> Preconditioner:
    """Random Hermitian admissible preconditioner with quality at most
    gamma (for A = I): T = I - g Q with ||Q|| = 1 Hermitian and g drawn
    uniformly from [0, gamma]."""
    if not 0.0 <= gamma < 1.0:
        raise ValueError("gamma must lie in [0, 1)")
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(int(rng))
    g = rng.standard_normal((dim, dim))
    if complex_field:
        g = g + 1j * rng.standard_normal((dim, dim))
    q = linalg.hermitian_part(g)
    scale = linalg.spectral_norm(q)
    strength = float(rng.uniform(0.0, gamma))
    if scale == 0.0 or strength == 0.0:
        return Preconditioner(t=np.eye(dim), gamma_measured=0.0, tag="random")
    t = np.eye(dim) - (strength / scale) * q
    return Preconditioner(t=t, gamma_measured=linalg.spectral_norm(np.eye(dim) - t), tag="random")


def worst_case(x: np.ndarray, b: np.ndarray, gamma: float) -> Preconditioner:
    """Worst admissible preconditioner of quality gamma at x (normalized
    setting: B positive diagonal, A = I).

    The construction scales the cone minimizer w so that y and B x - y are
    orthogonal, which makes ||B x - y|| = gamma ||B x - mu(x) x|| exactly;
    a real reflection H then maps gamma (B x - mu(x) x) onto B x - y, and
    T = I - gamma H is Hermitian positive definite with measured quality
    exactly gamma.  The preconditioned step from x lands on the ray of w,
    so the per-step bound is attained on the invariant-plane family.

    Complex x is replaced by its magnitude vector |x| first; the
    construction (and the sharpness claim) lives on the real family.
    """
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must lie strictly inside (0, 1)")
    bd = np.asarray(b, dtype=float)
    x = np.asarray(x)
    if np.iscomplexobj(x):
        x = theory.absolute_value_reduction(x)
    x = np.asarray(x, dtype=float)

    kappa = theory.rayleigh(x, bd)
    bx = bd * x
    res = bx - kappa * x
    if np.linalg.norm(res) <= theory.EIGENVECTOR_RESIDUAL_TOL * np.linalg.norm(bx):
        raise theory.AtEigenvectorError("worst case undefined at an eigenvector")

    w = theory.cone_minimizer(x, bd, gamma).w
    scale = float(np.vdot(w, bx).real)
    y = scale * w
    u = gamma * res
    v = bx - y
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    # The minimizer is found by bisection on the boundary angle, so the
    # error in nv is absolute at the scale ||B x|| * d(angle); compare
    # against the ambient norm rather than the (possibly tiny) residual.
    if abs(nu - nv) > 1e-10 * np.linalg.norm(bx):
        raise RuntimeError("cone minimizer scaling lost the reflection norm identity")
    h = linalg.householder_mapping(u, v * (nu / nv))
    t = np.eye(bd.shape[0]) - gamma * h
    return Preconditioner(
        t=t,
        gamma_measured=linalg.spectral_norm(gamma * h),
        tag="worst_case",
    )


def load_preconditioner(path: str, a: np.ndarray | None = None) -> Preconditioner:
    """Load T from a Matrix Market file and verify admissibility against A
    (identity when omitted)."""
    from . import problem

    t = linalg.require_hermitian(problem.load_matrix(path), what="T")
    if a is None:
        a = np.eye(t.shape[0])
    gamma = measure_gamma(t, a)
    if gamma >= 1.0:
        raise ValueError(f"preconditioner is not admissible: measured gamma = {gamma:.6g} >= 1")
    return Preconditioner(t=t, gamma_measured=gamma, tag="file")
