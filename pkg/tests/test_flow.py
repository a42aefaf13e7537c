"""Unit-speed descent flow: the closed-form crossing time, conservation
laws, refinement behavior, and the inverse-function comparison check."""

from __future__ import annotations

import math

import numpy as np
import pytest

from gradeig.flow import (
    angle_vs_arclength_check,
    integrate,
    inverse_function_lemma_check,
    mu_decrease_identity_check,
)
from gradeig.linalg import angle_between
from gradeig.theory import AtEigenvectorError, sample_level_set, span_representative

B2 = np.array([2.0, 1.0])


def start_pair():
    # mu = 1.75 on the (2, 1) circle: closed-form crossing time to
    # mu = 1.25 is pi/6 of arc
    return span_representative(B2, 0, 1.75)


class TestClosedFormCrossing:
    def test_t_bar_is_pi_over_six(self):
        trace = integrate(start_pair(), B2, 1.25, dt=1e-2)
        assert trace.t_bar == pytest.approx(math.pi / 6.0, abs=1e-6)
        assert trace.arc_length == pytest.approx(trace.t_bar, abs=1e-8)

    def test_endpoint_angle_matches_time(self):
        trace = integrate(start_pair(), B2, 1.25, dt=1e-3)
        ang = angle_between(trace.points[0], trace.points[-1])
        assert ang == pytest.approx(math.pi / 6.0, abs=1e-9)

    def test_invariants(self):
        trace = integrate(start_pair(), B2, 1.25, dt=1e-3)
        norms = np.linalg.norm(trace.points, axis=1)
        assert np.max(np.abs(norms - 1.0)) <= 1e-12
        assert np.all(np.diff(trace.mus) < 0)
        assert abs(trace.mus[-1] - 1.25) <= 1e-10
        assert trace.mus[0] == pytest.approx(1.75, abs=1e-14)

    def test_default_dt(self):
        trace = integrate(start_pair(), B2, 1.25)
        assert trace.t_bar == pytest.approx(math.pi / 6.0, abs=1e-5)


class TestQuadratureIdentity:
    def test_two_dim(self):
        trace = integrate(start_pair(), B2, 1.25, dt=1e-3)
        assert mu_decrease_identity_check(trace, B2) <= 1e-6

    def test_higher_dim(self, rng):
        b = np.array([9.0, 5.0, 2.5, 1.0])
        y0 = sample_level_set(b, 1, 4.0, rng, noise=0.4)
        trace = integrate(y0, b, 3.0, dt=1e-3)
        assert mu_decrease_identity_check(trace, b) <= 1e-6
        assert angle_vs_arclength_check(trace)


class TestRefinement:
    def test_dt_halving_contracts(self):
        t_bars = [integrate(start_pair(), B2, 1.25, dt=dt).t_bar for dt in (1e-2, 5e-3, 2.5e-3)]
        d1 = abs(t_bars[0] - t_bars[1])
        d2 = abs(t_bars[1] - t_bars[2])
        assert d1 <= 1e-8
        assert d2 <= max(d1 / 8.0, 5e-12)


class TestValidation:
    def test_eigenvector_start(self):
        with pytest.raises(AtEigenvectorError):
            integrate(np.array([1.0, 0.0]), B2, 1.5)

    def test_target_out_of_range(self):
        with pytest.raises(ValueError):
            integrate(start_pair(), B2, 1.9)  # above the start level
        with pytest.raises(ValueError):
            integrate(start_pair(), B2, 0.9)  # below the reachable floor
        b = np.array([5.0, 4.0, 2.0, 1.0])
        y0 = span_representative(b, 0, 4.3)
        with pytest.raises(ValueError):
            integrate(y0, b, 3.5)  # cannot cross the eigenvalue level at 4

    def test_bad_inputs(self):
        with pytest.raises(ValueError):
            integrate(start_pair(), np.array([2.0, -1.0]), 1.25)
        with pytest.raises(ValueError):
            integrate(start_pair(), B2, 1.25, dt=0.0)


class TestComparisonLemma:
    def test_identity_pair(self):
        ts = np.linspace(0.0, 1.0, 201)
        res = inverse_function_lemma_check((ts, ts), (ts, ts))
        assert res.hypothesis_holds and res.conclusion_holds
        assert res.first_violation is None

    def test_hypothesis_fails_and_conclusion_fails(self):
        # f = t on [0,1], g = t/2 on [0,2]: f' > g' at matched values, and
        # f(1 - xi) < g(2 - xi) for xi > 0
        ts1 = np.linspace(0.0, 1.0, 201)
        ts2 = np.linspace(0.0, 2.0, 201)
        res = inverse_function_lemma_check((ts1, ts1), (ts2, ts2 / 2.0))
        assert not res.hypothesis_holds
        assert not res.conclusion_holds
        assert res.first_violation == pytest.approx(1.0 / 99.0, abs=1e-12)

    def test_true_case_slow_f(self):
        # f = t/2 on [0,2], g = t on [0,1]: hypothesis holds, conclusion holds
        ts1 = np.linspace(0.0, 2.0, 201)
        ts2 = np.linspace(0.0, 1.0, 201)
        res = inverse_function_lemma_check((ts1, ts1 / 2.0), (ts2, ts2))
        assert res.hypothesis_holds and res.conclusion_holds

    def test_randomized_family(self):
        for seed in range(5):
            r = np.random.default_rng(seed)
            c = float(r.uniform(0.3, 0.95))
            base = np.cumsum(r.uniform(0.1, 1.0, size=200))
            g_vals = np.concatenate([[0.0], base / base[-1]])
            g_ts = np.linspace(0.0, 1.0, 201)
            f_ts = g_ts / c
            res = inverse_function_lemma_check((f_ts, g_vals), (g_ts, g_vals))
            assert res.hypothesis_holds
            assert res.conclusion_holds

    def test_mismatched_endpoints_rejected(self):
        ts = np.linspace(0.0, 1.0, 50)
        with pytest.raises(ValueError):
            inverse_function_lemma_check((ts, ts), (ts, 2.0 * ts))

    def test_non_monotone_rejected(self):
        ts = np.linspace(0.0, 1.0, 50)
        vals = ts.copy()
        vals[10] = vals[12]
        with pytest.raises(ValueError):
            inverse_function_lemma_check((ts, vals), (ts, ts))
