"""The audited gradient iteration: steps, interval bookkeeping, the
per-step contraction audit, the driver, and the CSV trace."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gradeig.iteration import (
    IterateState,
    TRACE_CSV_COLUMNS,
    bound_audit,
    gradient_step,
    interval_index,
    run,
    simplified_step,
    tail_ratio,
    trace_to_csv,
)
from gradeig.precond import identity_preconditioner, random_admissible, worst_case
from gradeig.problem import HermitianPencil, random_problem, solve_pencil
from gradeig.theory import rayleigh, sample_level_set, span_representative

B2 = np.array([2.0, 1.0])
FROZEN_OBSERVED = 0.5149218896448998


@pytest.fixture(scope="module")
def pair():
    pencil = HermitianPencil(np.diag(B2), np.eye(2))
    return pencil, solve_pencil(pencil)


class TestIntervalIndex:
    def test_interior_and_edges(self, pair):
        _, data = pair
        assert interval_index(1.5, data) == (0, False)
        assert interval_index(2.0, data) == (0, True)
        assert interval_index(1.0, data) == (1, False)
        above = interval_index(2.0 + 1e-13, data)
        assert above.at_top

    def test_out_of_range(self, pair):
        _, data = pair
        with pytest.raises(ValueError):
            interval_index(0.5, data)
        with pytest.raises(ValueError):
            interval_index(2.5, data)

    def test_tail_ratio_values(self, pair):
        _, data = pair
        assert tail_ratio(1.5, data) == pytest.approx(1.0, abs=1e-14)
        assert tail_ratio(2.0, data) == 0.0
        assert tail_ratio(1.25, data) == pytest.approx(3.0, abs=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(mu=st.floats(min_value=1.05, max_value=1.95))
    def test_tail_ratio_decreasing_in_mu(self, pair, mu):
        _, data = pair
        assert tail_ratio(mu + 0.01, data) < tail_ratio(mu, data)


class TestSteps:
    def test_simplified_equals_full_step_ray(self, rng):
        b = np.array([5.0, 2.0, 1.0])
        x = sample_level_set(b, 1, 1.5, rng)
        t = random_admissible(3, 0.5, 11)
        y1 = simplified_step(x, t, b)
        y2 = gradient_step(x, t, b, None, 0.0)
        assert np.allclose(y1 / np.linalg.norm(y1), y2 / np.linalg.norm(y2), atol=1e-13)

    def test_simplified_diagonal_vs_dense(self, rng):
        b = np.array([5.0, 2.0, 1.0])
        x = sample_level_set(b, 1, 1.5, rng)
        t = random_admissible(3, 0.5, 11)
        assert np.allclose(
            simplified_step(x, t, b), simplified_step(x, t, np.diag(b)), atol=1e-13
        )

    def test_converged_short_circuit(self):
        e1 = np.array([1.0, 0.0])
        assert np.array_equal(simplified_step(e1, identity_preconditioner(2), B2), e1)
        assert np.array_equal(gradient_step(e1, np.eye(2), B2, None, 0.0), e1)

    def test_validation(self, rng):
        x = np.array([1.0, 1.0])
        with pytest.raises(ValueError):
            simplified_step(x, np.eye(2), np.array([2.0, -1.0]))
        with pytest.raises(ValueError):
            simplified_step(x, np.eye(2), np.ones((2, 3)))
        with pytest.raises(ValueError):
            gradient_step(x, np.eye(2), B2, None, 2.0)  # mu(x) = 1.5 <= mu_min

    def test_identity_step_increases_mu(self, rng):
        b = np.array([5.0, 2.0, 1.0])
        for _ in range(5):
            x = sample_level_set(b, 1, 1.5, rng, noise=0.5)
            y = simplified_step(x, identity_preconditioner(3), b)
            assert rayleigh(y, b) >= rayleigh(x, b) - 1e-12


class TestBoundAudit:
    def test_frozen_worst_case_with_zero_mu_min(self, pair):
        pencil, data = pair
        x = span_representative(B2, 0, 1.5)
        p = worst_case(x, B2, 0.5)
        before = IterateState.from_vector(x, pencil, data)
        after = IterateState.from_vector(simplified_step(x, p, B2), pencil, data)
        report = bound_audit(before, after, data, 0.5, mu_min=0.0)
        assert report.trivial_reason is None
        assert report.sigma == pytest.approx(0.75, abs=1e-15)
        assert report.observed_factor == pytest.approx(FROZEN_OBSERVED, abs=5e-12)
        assert report.holds

    def test_full_step_default_mu_min(self, pair):
        pencil, data = pair
        x = span_representative(B2, 0, 1.5)
        t = random_admissible(2, 0.5, 4)
        before = IterateState.from_vector(x, pencil, data)
        after = IterateState.from_vector(
            gradient_step(x, t, pencil.b, pencil.a, data.mu_min), pencil, data
        )
        report = bound_audit(before, after, data, t.gamma_measured)
        assert report.sigma == pytest.approx(
            1.0 - (1.0 - t.gamma_measured), abs=1e-12
        )  # gap / (mu_i - mu_min) = 1 here
        assert report.holds

    def test_real_violation_not_masked_by_noise_slack(self, pair):
        # claim a much better gamma than the step actually used: the audit
        # must flag the step even with the resolution-aware slack
        pencil, data = pair
        x = span_representative(B2, 0, 1.5)
        p = worst_case(x, B2, 0.5)
        before = IterateState.from_vector(x, pencil, data)
        after = IterateState.from_vector(simplified_step(x, p, B2), pencil, data)
        report = bound_audit(before, after, data, 0.1, mu_min=0.0)
        assert not report.holds

    def test_trivial_reasons(self, pair):
        pencil, data = pair
        top = IterateState.from_vector(np.array([1.0, 0.0]), pencil, data)
        inside = IterateState.from_vector(span_representative(B2, 0, 1.5), pencil, data)
        assert bound_audit(top, inside, data, 0.0).trivial_reason == "converged"
        near_top = IterateState.from_vector(span_representative(B2, 0, 1.9999), pencil, data)
        assert bound_audit(inside, near_top, data, 0.0).lambda_after is not None
        jumped = bound_audit(inside, top, data, 0.0)
        assert jumped.trivial_reason == "jumped_interval"
        assert jumped.holds


class TestRun:
    def test_converges_to_top(self, rng):
        pencil, data = random_problem(4, "list:7,5,2,1", rng)
        x0 = rng.standard_normal(4)
        trace = run(pencil, lambda s: identity_preconditioner(4), x0, data=data)
        assert trace.stop_reason in ("at_top", "residual_tol")
        assert trace.states[-1].mu == pytest.approx(7.0, abs=1e-6)
        assert all(r.holds for r in trace.reports)
        assert len(trace.states) == len(trace.reports) + 1

    def test_monotone_mu(self, rng):
        pencil, data = random_problem(5, "list:9,6,4,2,1", rng)
        x0 = rng.standard_normal(5)
        factory = lambda s: random_admissible(5, 0.6, 13)
        trace = run(pencil, factory, x0, gamma=0.6, data=data)
        assert np.all(np.diff(trace.mus) >= -1e-11)

    def test_max_iters_and_validation(self, rng):
        pencil, data = random_problem(3, "list:3,2,1", rng)
        x0 = rng.standard_normal(3)
        trace = run(pencil, lambda s: identity_preconditioner(3), x0, max_iters=0, data=data)
        assert trace.stop_reason == "max_iters"
        assert trace.reports == []
        with pytest.raises(ValueError):
            run(pencil, lambda s: identity_preconditioner(3), x0, max_iters=-1)
        with pytest.raises(ValueError):
            run(pencil, lambda s: identity_preconditioner(3), x0, gamma=1.5)

    def test_trace_csv_schema_and_determinism(self, rng):
        pencil, data = random_problem(3, "list:5,2,1", 77)
        x0 = np.array([0.2, 1.0, 0.7])
        t1 = run(pencil, lambda s: identity_preconditioner(3), x0, data=data)
        t2 = run(pencil, lambda s: identity_preconditioner(3), x0, data=data)
        csv1, csv2 = trace_to_csv(t1), trace_to_csv(t2)
        assert csv1 == csv2
        lines = csv1.strip().split("\n")
        assert lines[0] == ",".join(TRACE_CSV_COLUMNS)
        assert len(lines) == len(t1.states) + 1
        first = lines[1].split(",")
        assert first[0] == "0"
        assert float(first[1]) == pytest.approx(t1.states[0].mu)
