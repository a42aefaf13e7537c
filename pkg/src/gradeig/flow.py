"""Normalized steepest-descent flow of the Rayleigh quotient on the unit
sphere, plus the comparison lemma used to order path lengths.

The flow y' = -grad mu(y) / ||grad mu(y)|| preserves ||y||, decreases mu
at unit speed per arc length, and is integrated with classical RK4 under
per-step renormalization until mu crosses a target level; the crossing
time is located by bisection inside the final step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg, theory

__all__ = [
    "FlowTrace",
    "integrate",
    "mu_decrease_identity_check",
    "angle_vs_arclength_check",
    "LemmaCheckResult",
    "inverse_function_lemma_check",
]

STALL_FACTOR = 1e-12
EVENT_T_TOL = 1e-12
EVENT_MU_TOL = 1e-10


@dataclass(frozen=True)
class FlowTrace:
    """Sampled flow path: times, unit points (rows), Rayleigh quotients,
    and cumulative geodesic arc length."""

    times: np.ndarray
    points: np.ndarray
    mus: np.ndarray
    arc_lengths: np.ndarray
    kappa_target: float

    @property
    def t_bar(self) -> float:
        return float(self.times[-1])

    @property
    def arc_length(self) -> float:
        return float(self.arc_lengths[-1])


def _unit_descent(y: np.ndarray, b: np.ndarray, b_norm: float) -> np.ndarray:
    g = theory.rayleigh_gradient(y, b)
    gn = np.linalg.norm(g)
    if gn <= STALL_FACTOR * b_norm:
        raise theory.AtEigenvectorError("flow stalled: gradient vanished near an eigenvector")
    return -g / gn


def _rk4_step(y: np.ndarray, dt: float, b: np.ndarray, b_norm: float) -> np.ndarray:
    k1 = _unit_descent(y, b, b_norm)
    k2 = _unit_descent(y + 0.5 * dt * k1, b, b_norm)
    k3 = _unit_descent(y + 0.5 * dt * k2, b, b_norm)
    k4 = _unit_descent(y + dt * k3, b, b_norm)
    y_new = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return y_new / np.linalg.norm(y_new)


def _geodesic_increment(y_prev: np.ndarray, y_new: np.ndarray) -> float:
    chord = float(np.linalg.norm(y_new - y_prev))
    return 2.0 * math.asin(min(0.5 * chord, 1.0))


def integrate(
    y0: np.ndarray,
    b: np.ndarray,
    kappa_target: float,
    *,
    dt: float | None = None,
    max_steps: int = 2_000_000,
) -> FlowTrace:
    """Integrate the unit-speed descent flow from y0 down to the level
    mu = kappa_target.

    The target must lie strictly between mu(y0) and the next eigenvalue
    below it.  dt defaults to 1e-3 (mu(y0) - kappa_target) clamped to
    [1e-5, 1e-2].  The final sample satisfies |mu - kappa_target| <=
    1e-10 (bisection to 1e-12 in t).
    """
    bd = np.asarray(b, dtype=float)
    if bd.ndim != 1 or np.any(bd <= 0.0):
        raise ValueError("b must be a strictly positive diagonal (1-D array)")
    y = np.asarray(linalg.unit(np.asarray(y0)))
    b_norm = float(bd.max())
    mu0 = theory.rayleigh(y, bd)
    _unit_descent(y, bd, b_norm)  # reject eigenvector starts up front

    evs = np.sort(bd)[::-1]
    below = evs[evs < mu0 - linalg.hybrid_tol(evs[0])]
    floor = float(below[0]) if below.size else -math.inf
    if not floor < kappa_target < mu0:
        raise ValueError(
            f"kappa_target = {kappa_target:.17g} must lie in ({floor:.17g}, {mu0:.17g})"
        )

    if dt is None:
        dt = min(max(1e-3 * (mu0 - kappa_target), 1e-5), 1e-2)
    if dt <= 0.0:
        raise ValueError("dt must be positive")

    times = [0.0]
    points = [y]
    mus = [mu0]
    arcs = [0.0]

    for _ in range(max_steps):
        y_new = _rk4_step(y, dt, bd, b_norm)
        mu_new = theory.rayleigh(y_new, bd)
        if mu_new > kappa_target:
            times.append(times[-1] + dt)
            points.append(y_new)
            mus.append(mu_new)
            arcs.append(arcs[-1] + _geodesic_increment(y, y_new))
            y = y_new
            continue
        # crossed (or landed on) the target inside this step: bisect the
        # substep length
        lo, hi = 0.0, dt
        y_hi, mu_hi = y_new, mu_new
        for _ in range(200):
            if hi - lo <= EVENT_T_TOL and abs(mu_hi - kappa_target) <= EVENT_MU_TOL:
                break
            if hi - lo <= 1e-17 * max(1.0, dt):
                break
            mid = 0.5 * (lo + hi)
            y_mid = _rk4_step(y, mid, bd, b_norm)
            mu_mid = theory.rayleigh(y_mid, bd)
            if abs(mu_mid - kappa_target) <= 0.1 * EVENT_MU_TOL:
                y_hi, mu_hi = y_mid, mu_mid
                hi = mid
                break
            if mu_mid > kappa_target:
                lo = mid
            else:
                hi = mid
                y_hi, mu_hi = y_mid, mu_mid
        times.append(times[-1] + hi)
        points.append(y_hi)
        mus.append(mu_hi)
        arcs.append(arcs[-1] + _geodesic_increment(y, y_hi))
        return FlowTrace(
            times=np.array(times),
            points=np.vstack(points),
            mus=np.array(mus),
            arc_lengths=np.array(arcs),
            kappa_target=float(kappa_target),
        )
    raise RuntimeError("flow failed to reach the target level within max_steps")


def mu_decrease_identity_check(trace: FlowTrace, b: np.ndarray) -> float:
    """Defect of the exact-decrease identity mu(y(0)) - mu(y(t_bar)) =
    integral of ||grad mu(y(t))|| dt, via trapezoidal quadrature over the
    trace samples.  Small (<= 1e-6) for dt <= 1e-3."""
    bd = np.asarray(b, dtype=float)
    gnorms = np.array([theory.gradient_norm(y, bd) for y in trace.points])
    quad = float(np.trapezoid(gnorms, trace.times))
    drop = float(trace.mus[0] - trace.mus[-1])
    return abs(drop - quad)


def angle_vs_arclength_check(
    trace: FlowTrace,
    *,
    slack: float = 1e-8,
    equality_tol: float = 1e-6,
    planarity_ratio: float = 1e-9,
) -> bool:
    """Endpoint angle never exceeds the traversed arc length (within
    slack); for a path confined to a plane the two agree to equality_tol."""
    ang = linalg.angle_between(trace.points[0], trace.points[-1])
    arc = trace.arc_length
    if ang > arc + slack:
        return False
    svals = np.linalg.svd(trace.points, compute_uv=False)
    planar = trace.points.shape[1] <= 2 or (
        svals.shape[0] >= 3 and svals[2] <= planarity_ratio * svals[0]
    )
    if planar and abs(ang - arc) > equality_tol:
        return False
    return True


@dataclass(frozen=True)
class LemmaCheckResult:
    """Outcome of the monotone comparison check: whether the matched-value
    derivative hypothesis holds on the samples, whether the backward-offset
    conclusion f(a - xi) >= g(b - xi) holds on the xi grid, and the first
    violating xi if any."""

    hypothesis_holds: bool
    conclusion_holds: bool
    first_violation: float | None


def _require_strictly_increasing(ts: np.ndarray, vals: np.ndarray, name: str) -> None:
    if ts.ndim != 1 or vals.shape != ts.shape or ts.shape[0] < 2:
        raise ValueError(f"{name} samples must be two equal-length 1-D arrays")
    if np.any(np.diff(ts) <= 0.0) or np.any(np.diff(vals) <= 0.0):
        raise ValueError(f"{name} must be strictly increasing in both abscissa and value")


def inverse_function_lemma_check(
    f_samples: tuple[np.ndarray, np.ndarray],
    g_samples: tuple[np.ndarray, np.ndarray],
    a: float | None = None,
    *,
    grid: int = 100,
    match_tol: float = 1e-10,
) -> LemmaCheckResult:
    """Check the comparison lemma for tabulated strictly increasing f, g.

    With b the last abscissa of g and f(a) = g(b) (required, to match_tol),
    the hypothesis is f'(alpha) <= g'(beta) whenever f(alpha) = g(beta);
    the conclusion is f(a - xi) >= g(b - xi) for xi in [0, min(a, b)],
    checked on a uniform grid.  Derivatives and values are interpolated
    from the tables, so verdicts carry the tables' resolution.
    """
    f_ts = np.asarray(f_samples[0], dtype=float)
    f_vals = np.asarray(f_samples[1], dtype=float)
    g_ts = np.asarray(g_samples[0], dtype=float)
    g_vals = np.asarray(g_samples[1], dtype=float)
    _require_strictly_increasing(f_ts, f_vals, "f")
    _require_strictly_increasing(g_ts, g_vals, "g")

    if a is None:
        a = float(f_ts[-1])
    if not f_ts[0] <= a <= f_ts[-1]:
        raise ValueError("a must lie inside the f sample range")
    b_end = float(g_ts[-1])
    f_at_a = float(np.interp(a, f_ts, f_vals))
    g_at_b = float(g_vals[-1])
    if abs(f_at_a - g_at_b) > match_tol * max(1.0, abs(g_at_b)):
        raise ValueError("f(a) must equal g(b) within tolerance")

    # derivative hypothesis at matched values
    f_der = np.gradient(f_vals, f_ts)
    g_der = np.gradient(g_vals, g_ts)
    lo_val = max(float(f_vals[0]), float(g_vals[0]))
    hi_val = f_at_a
    hypothesis_holds = True
    if hi_val > lo_val:
        probe = np.linspace(lo_val, hi_val, 201)
        alphas = np.interp(probe, f_vals, f_ts)
        betas = np.interp(probe, g_vals, g_ts)
        fd = np.interp(alphas, f_ts, f_der)
        gd = np.interp(betas, g_ts, g_der)
        slack = 1e-6 * np.maximum(1.0, np.abs(gd))
        hypothesis_holds = bool(np.all(fd <= gd + slack))

    xi_max = min(a - float(f_ts[0]), b_end - float(g_ts[0]))
    xis = np.linspace(0.0, xi_max, grid)
    f_back = np.interp(a - xis, f_ts, f_vals)
    g_back = np.interp(b_end - xis, g_ts, g_vals)
    margin = f_back - g_back
    tol = match_tol * max(1.0, abs(g_at_b))
    bad = np.nonzero(margin < -tol)[0]
    if bad.size:
        return LemmaCheckResult(hypothesis_holds, False, float(xis[bad[0]]))
    return LemmaCheckResult(hypothesis_holds, True, None)
