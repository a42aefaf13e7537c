"""Rayleigh-quotient geometry: cones, minimizers, the step quadratic, the
interval bound on the gradient norm.  Frozen reference values for the
two-eigenvalue problem (2, 1) at kappa = 1.5, gamma = 0.5 were computed
by hand from the closed forms and pinned here."""

from __future__ import annotations

import math

import numpy as np
import pytest

from gradeig.linalg import angle_between, proportionality_defect, unit
from gradeig.theory import (
    AtEigenvectorError,
    absolute_value_reduction,
    alpha_quadratic,
    cone_angle,
    cone_minimizer,
    finite_difference_gradient,
    gradient_norm,
    rayleigh,
    rayleigh_gradient,
    residual,
    sample_level_set,
    sigma_factor,
    sigma_of_alpha,
    span_representative,
    temple_bound,
    two_dim_coordinates,
)

B2 = np.array([2.0, 1.0])
KAPPA = 1.5
GAMMA = 0.5

# frozen oracle values for (2, 1), kappa = 1.5, gamma = 0.5
AXIS_ANGLE = 0.3217505543966422          # angle(x, B x) at the span point
OPENING_ANGLE = 0.1587802146457607       # arcsin(gamma * sin(axis angle))
ALPHA_PLUS = 1.2979991993593594
ALPHA_MINUS = -3.6979991993593595
SIGMA_AT_ALPHA = 0.7175805805934967
MU_W = 1.660100040032056


def span_x():
    return span_representative(B2, 0, KAPPA)


class TestRayleighBasics:
    def test_rayleigh_diagonal(self):
        assert rayleigh(np.array([1.0, 1.0]), B2) == pytest.approx(1.5, abs=1e-15)

    def test_rayleigh_dense_and_pencil(self, rng):
        b = np.diag([3.0, 1.0])
        a = np.diag([1.0, 2.0])
        x = np.array([1.0, 1.0])
        assert rayleigh(x, b, a) == pytest.approx(4.0 / 3.0, abs=1e-15)

    def test_residual_orthogonal_to_x(self, rng):
        x = rng.standard_normal(5)
        b = np.abs(rng.standard_normal(5)) + 0.5
        r = residual(x, b)
        assert abs(np.vdot(x, r)) <= 1e-12 * np.linalg.norm(r) + 1e-15

    def test_gradient_matches_finite_difference(self, rng):
        x = unit(rng.standard_normal(4))
        b = np.array([5.0, 3.0, 2.0, 1.0])
        g = rayleigh_gradient(x, b)
        fd = finite_difference_gradient(x, b)
        assert np.allclose(g, fd, atol=1e-5)
        assert abs(np.vdot(x, g)) <= 1e-10
        assert gradient_norm(x, b) == pytest.approx(float(np.linalg.norm(g)), abs=1e-12)


class TestConeAngle:
    def test_frozen_angles(self):
        spec = cone_angle(span_x(), B2, GAMMA)
        assert spec.opening_angle == pytest.approx(OPENING_ANGLE, abs=1e-14)
        assert angle_between(span_x(), spec.axis) == pytest.approx(AXIS_ANGLE, abs=1e-14)
        assert spec.gamma == GAMMA
        assert spec.kappa == pytest.approx(KAPPA, abs=1e-14)

    def test_gamma_zero_collapses(self):
        assert cone_angle(span_x(), B2, 0.0).opening_angle == pytest.approx(0.0, abs=1e-15)

    def test_gamma_one_reaches_axis_angle(self):
        spec = cone_angle(span_x(), B2, 1.0)
        assert spec.opening_angle == pytest.approx(AXIS_ANGLE, abs=1e-14)

    def test_collapses_at_eigenvector(self):
        spec = cone_angle(np.array([1.0, 0.0]), B2, GAMMA)
        assert spec.opening_angle == 0.0


class TestConeMinimizer:
    def test_frozen_alpha_and_mu(self):
        res = cone_minimizer(span_x(), B2, GAMMA)
        assert res.alpha == pytest.approx(ALPHA_PLUS, abs=1e-9)
        assert res.mu_w == pytest.approx(MU_W, abs=1e-10)
        assert KAPPA < res.mu_w < 2.0

    def test_lands_on_cone_boundary(self):
        res = cone_minimizer(span_x(), B2, GAMMA)
        bx = B2 * span_x()
        assert angle_between(res.w, bx) == pytest.approx(OPENING_ANGLE, abs=1e-12)

    def test_resolvent_alignment(self):
        res = cone_minimizer(span_x(), B2, GAMMA)
        bx = B2 * span_x()
        assert proportionality_defect((B2 + res.alpha) * res.w, bx) <= 1e-10

    def test_beats_boundary_samples(self, rng):
        x = sample_level_set(np.array([5.0, 2.0, 1.0, 0.5]), 1, 1.6, rng)
        b = np.array([5.0, 2.0, 1.0, 0.5])
        res = cone_minimizer(x, b, 0.4)
        from gradeig.verify import cone_boundary_samples

        samples = cone_boundary_samples(x, b, 0.4, 2000, rng)
        mus = np.einsum("ij,j,ij->i", samples, b, samples) / np.einsum(
            "ij,ij->i", samples, samples
        )
        assert res.mu_w <= float(mus.min()) + 1e-8

    def test_gamma_zero_returns_axis(self):
        res = cone_minimizer(span_x(), B2, 0.0)
        assert math.isinf(res.alpha)
        assert proportionality_defect(res.w, B2 * span_x()) <= 1e-12

    def test_rejects_eigenvector(self):
        with pytest.raises(AtEigenvectorError):
            cone_minimizer(np.array([0.0, 1.0]), B2, GAMMA)

    def test_dense_matrix_route_matches_diagonal(self, rng):
        q, _ = np.linalg.qr(rng.standard_normal((2, 2)))
        dense = q @ np.diag(B2) @ q.T
        x = q @ span_x()
        res_dense = cone_minimizer(x, dense, GAMMA)
        assert res_dense.mu_w == pytest.approx(MU_W, abs=1e-9)


class TestAlphaQuadratic:
    def test_frozen_coefficients_and_roots(self):
        roots = alpha_quadratic(KAPPA, 2.0, 1.0, GAMMA)
        assert roots.coefficients == pytest.approx((0.625, 1.5, -3.0), abs=1e-12)
        assert roots.alpha_plus == pytest.approx(ALPHA_PLUS, abs=1e-12)
        assert roots.alpha_minus == pytest.approx(ALPHA_MINUS, abs=1e-12)
        assert roots.alpha_minus < 0.0 < roots.alpha_plus

    def test_roots_satisfy_quadratic(self):
        roots = alpha_quadratic(KAPPA, 2.0, 1.0, GAMMA)
        c2, c1, c0 = roots.coefficients
        for r in (roots.alpha_plus, roots.alpha_minus):
            assert abs(c2 * r * r + c1 * r + c0) <= 1e-10

    def test_limit_toward_interval_top(self):
        # alpha_plus -> mu_i1 (1 - gamma) / gamma as kappa -> mu_i
        roots = alpha_quadratic(2.0 - 1e-8, 2.0, 1.0, GAMMA)
        assert roots.alpha_plus == pytest.approx(1.0, abs=1e-6)


class TestSigma:
    def test_frozen_sigma_of_alpha(self):
        assert sigma_of_alpha(ALPHA_PLUS, 2.0, 1.0) == pytest.approx(
            SIGMA_AT_ALPHA, abs=1e-12
        )

    def test_sigma_factor_values(self):
        assert sigma_factor(2.0, 1.0, 0.0, GAMMA) == pytest.approx(0.75, abs=1e-15)
        assert sigma_factor(2.0, 1.0, 1.0, GAMMA) == pytest.approx(0.5, abs=1e-15)
        assert sigma_factor(2.0, 1.0, 0.0, 0.0) == pytest.approx(0.5, abs=1e-15)

    def test_sigma_monotone_in_gamma(self):
        sigmas = [sigma_factor(2.0, 1.0, 0.0, g) for g in (0.1, 0.4, 0.7, 0.9)]
        assert all(a < b for a, b in zip(sigmas, sigmas[1:]))


class TestTwoDimCoordinates:
    def test_midpoint(self):
        assert two_dim_coordinates(1.5, 2.0, 1.0) == pytest.approx((0.5, 0.5), abs=1e-15)

    def test_weights_reproduce_kappa(self):
        s, c = two_dim_coordinates(1.8, 2.0, 1.0)
        assert s + c == pytest.approx(1.0, abs=1e-15)
        assert 2.0 * s + 1.0 * c == pytest.approx(1.8, abs=1e-14)


class TestTemple:
    def test_frozen_bound(self):
        assert temple_bound(KAPPA, 2.0, 1.0) == pytest.approx(0.25, abs=1e-15)

    def test_equality_on_span(self):
        x = span_x()
        lhs = gradient_norm(x, B2) ** 2 / 4.0  # grad = 2 * residual at unit x
        assert lhs == pytest.approx(temple_bound(KAPPA, 2.0, 1.0), abs=1e-12)

    def test_strict_inequality_off_span(self, rng):
        b = np.array([5.0, 2.0, 1.0, 0.5])
        for _ in range(25):
            x = sample_level_set(b, 1, 1.6, rng, noise=0.5)
            lhs = float(np.linalg.norm(residual(x, b)) ** 2)
            assert lhs > temple_bound(1.6, 2.0, 1.0)


class TestLevelSetSampling:
    def test_span_representative_hits_kappa(self):
        x = span_x()
        assert rayleigh(x, B2) == pytest.approx(KAPPA, abs=1e-14)
        assert np.linalg.norm(x) == pytest.approx(1.0, abs=1e-14)

    def test_span_kappa_out_of_range(self):
        with pytest.raises(ValueError):
            span_representative(B2, 0, 2.5)

    def test_sample_level_set_hits_kappa(self, rng):
        b = np.array([7.0, 4.0, 2.0, 1.0, 0.5])
        for _ in range(10):
            x = sample_level_set(b, 1, 3.0, rng, noise=0.5)
            assert rayleigh(x, b) == pytest.approx(3.0, abs=1e-10)
            assert np.linalg.norm(x) == pytest.approx(1.0, abs=1e-12)

    def test_tail_only_support(self, rng):
        b = np.array([7.0, 4.0, 2.0, 1.0, 0.5])
        x = sample_level_set(b, 1, 3.0, rng, noise=0.5, tail_only=True)
        assert abs(x[0]) <= 1e-15  # no weight above the interval pair
        assert rayleigh(x, b) == pytest.approx(3.0, abs=1e-10)

    def test_tail_only_minimizer_stays_below_interval_top(self, rng):
        b = np.array([7.0, 4.0, 2.0, 1.0, 0.5])
        for _ in range(10):
            x = sample_level_set(b, 1, 3.0, rng, noise=0.6, tail_only=True)
            res = cone_minimizer(x, b, 0.5)
            assert 3.0 < res.mu_w < 4.0

    def test_complex_sampling(self, rng):
        b = np.array([5.0, 2.0, 1.0])
        x = sample_level_set(b, 1, 1.5, rng, complex_field=True)
        assert np.iscomplexobj(x)
        assert rayleigh(x, b) == pytest.approx(1.5, abs=1e-10)


def test_absolute_value_reduction_preserves_rayleigh(rng):
    b = np.array([5.0, 2.0, 1.0])
    x = sample_level_set(b, 1, 1.5, rng, complex_field=True)
    y = absolute_value_reduction(x)
    assert not np.iscomplexobj(y)
    assert np.all(y >= 0)
    assert rayleigh(y, b) == pytest.approx(rayleigh(x, b), abs=1e-12)
