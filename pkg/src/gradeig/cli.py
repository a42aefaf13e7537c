"""Command-line harness: builds problems, runs solves, sweeps the
sharpness experiment, integrates descent flows, and runs the property
suites, emitting deterministic CSV/JSON.

Exit codes: 0 success (and, where applicable, every checked property
holds), 1 property violation, 2 usage or input-validation error, 3 I/O
error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from ._format import f17
from .flow import integrate
from .iteration import IterateState, run, simplified_step, trace_to_csv
from .linalg import NotPositiveDefiniteError
from .precond import (
    Preconditioner,
    identity_preconditioner,
    load_preconditioner,
    measure_gamma,
    random_admissible,
    worst_case,
)
from .problem import (
    load_matrix,
    load_pencil,
    parse_spectrum,
    random_problem,
    solve_pencil,
)
from .theory import (
    alpha_quadratic,
    rayleigh,
    sigma_factor,
    sigma_of_alpha,
    span_representative,
)
from .verify import VerifyProfile, run_verification

__all__ = ["main"]


class _UsageError(ValueError):
    """Invalid flag combination or invalid input values (exit code 2)."""


def _parse_dims(text: str) -> tuple[int, ...]:
    text = text.strip()
    if "-" in text and "," not in text:
        lo_s, hi_s = text.split("-", 1)
        lo, hi = int(lo_s), int(hi_s)
        if hi < lo:
            raise _UsageError("dimension range must be increasing")
        return tuple(range(lo, hi + 1))
    return tuple(int(part) for part in text.split(","))


def _parse_gammas(text: str) -> tuple[float, ...]:
    return tuple(float(part) for part in text.split(","))


def _parse_kappa_grid(text: str) -> np.ndarray:
    parts = text.split(":")
    if len(parts) != 3:
        raise _UsageError("kappa grid must be lo:hi:count")
    lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    if count < 1 or not hi > lo:
        raise _UsageError("kappa grid must satisfy lo < hi and count >= 1")
    return np.linspace(lo, hi, count)


def _write_output(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _json_dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2)


def _load_problem(args):
    """Problem from Matrix Market files when given, else generated."""
    if args.b_path is not None:
        pencil = load_pencil(args.b_path, args.a_path)
        return pencil, solve_pencil(pencil)
    if args.spectrum is None:
        raise _UsageError("provide --spectrum (or --b FILE) to define the problem")
    values = parse_spectrum(args.spectrum)
    dim = args.dim if args.dim is not None else values.shape[0]
    if dim != values.shape[0]:
        raise _UsageError(
            f"--dim {dim} disagrees with the {values.shape[0]} spectrum values"
        )
    rng = np.random.default_rng([args.seed, 101])
    return random_problem(dim, values, rng)


def _initial_vector(args, pencil, data) -> np.ndarray:
    spec = args.x0
    dim = pencil.dim
    if spec == "random":
        rng = np.random.default_rng([args.seed, 202])
        return rng.standard_normal(dim)
    if spec.startswith("span:"):
        try:
            i_s, j_s = spec[len("span:") :].split(",")
            i, j = int(i_s), int(j_s)
        except ValueError as exc:
            raise _UsageError("--x0 span expects span:i,j") from exc
        if not (0 <= i < dim and 0 <= j < dim and i != j):
            raise _UsageError("span indices must be distinct and inside the problem")
        return data.eigenvectors[:, i] + data.eigenvectors[:, j]
    if spec.startswith("file:"):
        vec = np.asarray(load_matrix(spec[len("file:") :]))
        vec = vec.ravel()
        if vec.shape[0] != dim:
            raise _UsageError("loaded start vector has the wrong dimension")
        return vec
    raise _UsageError("--x0 must be random, span:i,j, or file:PATH")


def _precond_factory(args, pencil, data):
    """Per-state preconditioner factory for the solve loop."""
    spec = args.precond
    dim = pencil.dim
    identity = np.eye(dim)
    a_is_identity = bool(np.allclose(pencil.a, identity, atol=1e-12))

    def adapted(p: Preconditioner) -> Preconditioner:
        """Quality re-measured against the problem's actual A."""
        if a_is_identity:
            return p
        measured = measure_gamma(p.t, pencil.a)
        if measured >= 1.0:
            raise _UsageError(
                f"preconditioner '{spec}' is not admissible for this A "
                f"(measured gamma = {measured:.6g} >= 1); supply file:PATH"
            )
        return Preconditioner(t=p.t, gamma_measured=measured, tag=p.tag)

    if spec == "identity":
        p = adapted(identity_preconditioner(dim))
        return lambda state: p
    if spec == "random":
        rng = np.random.default_rng([args.seed, 303])

        def fresh(state: IterateState) -> Preconditioner:
            return adapted(random_admissible(dim, args.gamma, rng))

        if args.gamma == 0.0:
            p0 = adapted(identity_preconditioner(dim))
            return lambda state: p0
        return fresh
    if spec == "worst-case":
        if not np.allclose(pencil.a, identity, atol=1e-12):
            raise _UsageError("worst-case preconditioning requires A = I")
        if args.gamma == 0.0:
            p0 = identity_preconditioner(dim)
            return lambda state: p0
        vectors = data.eigenvectors

        def conjugated(state: IterateState) -> Preconditioner:
            coeffs = vectors.conj().T @ state.x
            inner = worst_case(coeffs, data.eigenvalues, args.gamma)
            t = vectors @ inner.t.astype(vectors.dtype) @ vectors.conj().T
            return Preconditioner(t=t, gamma_measured=inner.gamma_measured, tag=inner.tag)

        return conjugated
    if spec.startswith("file:"):
        p = load_preconditioner(spec[len("file:") :], pencil.a)
        return lambda state: p
    raise _UsageError("--precond must be identity, random, worst-case, or file:PATH")


def cmd_solve(args) -> int:
    pencil, data = _load_problem(args)
    x0 = _initial_vector(args, pencil, data)
    factory = _precond_factory(args, pencil, data)
    trace = run(
        pencil,
        factory,
        x0,
        gamma=args.gamma,
        residual_tol=args.residual_tol,
        max_iters=args.max_iters,
        data=data,
    )
    all_hold = all(report.holds for report in trace.reports)
    summary = {
        "iterations": len(trace.reports),
        "stop_reason": trace.stop_reason,
        "final_mu": trace.states[-1].mu,
        "final_residual_norm": trace.states[-1].residual_norm,
        "gamma": args.gamma,
        "precond": args.precond,
        "all_bound_checks_hold": all_hold,
    }
    if args.format == "json":
        _write_output(_json_dumps(summary), args.out)
    else:
        _write_output(trace_to_csv(trace), args.out)
        if args.out is not None:
            sys.stdout.write(_json_dumps(summary) + "\n")
    return 0 if all_hold else 1


def cmd_sharpness(args) -> int:
    values = parse_spectrum(args.spectrum if args.spectrum else "list:2,1")
    if values.shape[0] != 2:
        raise _UsageError("sharpness sweeps a two-eigenvalue problem; give --spectrum list:MU_I,MU_I1")
    mu_i, mu_i1 = float(values[0]), float(values[1])
    if mu_i1 <= 0.0:
        raise _UsageError("sharpness requires positive eigenvalues")
    gamma = args.gamma
    if args.kappa_grid is not None:
        kappas = _parse_kappa_grid(args.kappa_grid)
        if kappas[0] <= mu_i1 or kappas[-1] >= mu_i:
            raise _UsageError("kappa grid must lie strictly inside (mu_i1, mu_i)")
    else:
        gap = mu_i - mu_i1
        kappas = np.linspace(mu_i1 + 0.05 * gap, mu_i - 1e-8 * gap, 40)
    sigma_limit = sigma_factor(mu_i, mu_i1, 0.0, gamma)
    rows = []
    worst_defect = 0.0
    for kappa in kappas:
        kappa = float(kappa)
        x = span_representative(values, 0, kappa)
        if gamma == 0.0:
            alpha = np.inf
            x2 = simplified_step(x, np.eye(2), values)
        else:
            alpha = alpha_quadratic(kappa, mu_i, mu_i1, gamma).alpha_plus
            x2 = simplified_step(x, worst_case(x, values, gamma).t, values)
        sigma_alpha = sigma_of_alpha(alpha, mu_i, mu_i1)
        mu2 = rayleigh(x2, values)
        lam_before = (mu_i - kappa) / (kappa - mu_i1)
        lam_after = max(mu_i - mu2, 0.0) / (mu2 - mu_i1)
        observed = lam_after / lam_before
        worst_defect = max(worst_defect, abs(observed - sigma_alpha * sigma_alpha))
        rows.append((kappa, alpha, sigma_alpha, observed, sigma_limit * sigma_limit))
    header = "kappa,alpha,sigma_alpha,observed_factor,sigma_bound"
    lines = [header]
    for row in rows:
        lines.append(",".join(f17(v) for v in row))
    if args.format == "json":
        payload = {
            "mu_i": mu_i,
            "mu_i1": mu_i1,
            "gamma": gamma,
            "sigma_bound": sigma_limit * sigma_limit,
            "worst_route_defect": worst_defect,
            "rows": [
                {
                    "kappa": r[0],
                    "alpha": None if np.isinf(r[1]) else r[1],
                    "sigma_alpha": r[2],
                    "observed_factor": r[3],
                }
                for r in rows
            ],
        }
        _write_output(_json_dumps(payload), args.out)
    else:
        _write_output("\n".join(lines) + "\n", args.out)
    return 0 if worst_defect <= 1e-10 else 1


def cmd_flow(args) -> int:
    values = parse_spectrum(args.spectrum if args.spectrum else "list:2,1")
    if np.any(values <= 0.0):
        raise _UsageError("flow integration requires a positive spectrum")
    dim = values.shape[0]
    if args.kappa is None:
        raise _UsageError("flow requires --kappa TARGET")
    if args.x0.startswith("span:"):
        try:
            i_s, j_s = args.x0[len("span:") :].split(",")
            i, j = int(i_s), int(j_s)
        except ValueError as exc:
            raise _UsageError("--x0 span expects span:i,j") from exc
        if not (0 <= i < dim and 0 <= j < dim and i != j):
            raise _UsageError("span indices must be distinct and inside the problem")
        if args.start_mu is not None:
            if j != i + 1:
                raise _UsageError("--start-mu needs an adjacent pair span:i,i+1")
            y0 = span_representative(values, i, args.start_mu)
        else:
            y0 = np.zeros(dim)
            y0[i] = y0[j] = 1.0
    elif args.x0 == "random":
        if args.start_mu is not None:
            raise _UsageError("--start-mu requires --x0 span:i,i+1")
        rng = np.random.default_rng([args.seed, 404])
        y0 = rng.standard_normal(dim)
    elif args.x0.startswith("file:"):
        y0 = np.asarray(load_matrix(args.x0[len("file:") :])).ravel()
        if y0.shape[0] != dim:
            raise _UsageError("loaded start vector has the wrong dimension")
    else:
        raise _UsageError("--x0 must be random, span:i,j, or file:PATH")
    trace = integrate(y0, values, args.kappa, dt=args.dt)
    if args.format == "json":
        payload = {
            "t_bar": trace.t_bar,
            "arc_length": trace.arc_length,
            "steps": len(trace.times) - 1,
            "start_mu": float(trace.mus[0]),
            "final_mu": float(trace.mus[-1]),
            "kappa": trace.kappa_target,
        }
        _write_output(_json_dumps(payload), args.out)
    else:
        comp_headers = ",".join(f"comp{k}" for k in range(dim))
        lines = [f"t,mu,{comp_headers},arc_length"]
        for k in range(len(trace.times)):
            comps = ",".join(f17(abs(c)) for c in trace.points[k])
            lines.append(
                f"{f17(trace.times[k])},{f17(trace.mus[k])},{comps},{f17(trace.arc_lengths[k])}"
            )
        _write_output("\n".join(lines) + "\n", args.out)
    return 0


def cmd_verify(args) -> int:
    profile = VerifyProfile(
        trials=args.trials,
        dims=_parse_dims(args.dims),
        gammas=_parse_gammas(args.gammas),
        boundary_samples=args.boundary_samples,
        level_samples=args.level_samples,
        lemma_cases=args.lemma_cases,
        seed=args.seed,
        sigma_scale=0.9 if args.inject_bug == "sigma09" else 1.0,
    )
    summary = run_verification(profile)
    _write_output(_json_dumps(summary.to_jsonable()), args.out)
    return 0 if summary.overall_pass else 1


def cmd_spectrum(args) -> int:
    if args.b_path is not None:
        pencil = load_pencil(args.b_path, args.a_path)
        values = solve_pencil(pencil).eigenvalues
    elif args.spectrum is not None:
        values = parse_spectrum(args.spectrum)
    else:
        raise _UsageError("provide --spectrum or --b FILE")
    if args.format == "json":
        _write_output(_json_dumps({"eigenvalues": [float(v) for v in values]}), args.out)
    else:
        lines = ["index,value"]
        lines.extend(f"{k},{f17(v)}" for k, v in enumerate(values))
        _write_output("\n".join(lines) + "\n", args.out)
    return 0


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=0, help="generator seed (default 0)")
    parser.add_argument("--out", default=None, help="output path (default stdout)")
    parser.add_argument(
        "--format", choices=("csv", "json"), default="csv", help="output format (default csv)"
    )


def _add_problem_source(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--dim", type=int, default=None, help="problem dimension")
    parser.add_argument(
        "--spectrum",
        default=None,
        help="spectrum mini-language: list:2,1 | linspace:a,b,n | logspace:a,b,n",
    )
    parser.add_argument("--a", dest="a_path", default=None, help="Matrix Market file for A")
    parser.add_argument("--b", dest="b_path", default=None, help="Matrix Market file for B")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gradeig",
        description="Preconditioned gradient eigensolver with a sharp-bound "
        "verification harness.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="run the iteration and audit every step")
    _add_problem_source(p_solve)
    p_solve.add_argument("--gamma", type=float, default=0.0, help="preconditioner quality bound")
    p_solve.add_argument(
        "--precond",
        default="identity",
        help="identity | random | worst-case | file:PATH (default identity)",
    )
    p_solve.add_argument(
        "--x0", default="random", help="random | span:i,j | file:PATH (default random)"
    )
    p_solve.add_argument("--max-iters", type=int, default=1000, help="iteration cap")
    p_solve.add_argument(
        "--residual-tol", type=float, default=None, help="residual stop (default 1e-10*norm(B))"
    )
    _add_common(p_solve)
    p_solve.set_defaults(func=cmd_solve)

    p_sharp = sub.add_parser(
        "sharpness", help="sweep worst-case preconditioners over a kappa grid"
    )
    p_sharp.add_argument(
        "--spectrum", default="list:2,1", help="two eigenvalues, e.g. list:2,1"
    )
    p_sharp.add_argument("--gamma", type=float, default=0.5, help="preconditioner quality")
    p_sharp.add_argument(
        "--kappa-grid", default=None, help="lo:hi:count strictly inside the interval"
    )
    _add_common(p_sharp)
    p_sharp.set_defaults(func=cmd_sharpness)

    p_flow = sub.add_parser("flow", help="integrate the normalized descent flow")
    p_flow.add_argument("--spectrum", default="list:2,1", help="positive diagonal spectrum")
    p_flow.add_argument("--x0", default="span:0,1", help="random | span:i,j | file:PATH")
    p_flow.add_argument(
        "--start-mu", type=float, default=None, help="exact starting level on the span pair"
    )
    p_flow.add_argument("--kappa", type=float, default=None, help="target quotient level")
    p_flow.add_argument("--dt", type=float, default=None, help="integration step")
    _add_common(p_flow)
    p_flow.set_defaults(func=cmd_flow)

    p_verify = sub.add_parser("verify", help="run the property suites")
    p_verify.add_argument("--trials", type=int, default=1000, help="trial count (default 1000)")
    p_verify.add_argument("--dims", default="2-12", help="dimensions, range 2-12 or comma list")
    p_verify.add_argument(
        "--gammas", default="0.1,0.5,0.9", help="comma list of gamma caps"
    )
    p_verify.add_argument(
        "--boundary-samples", type=int, default=10_000, help="cone boundary samples per trial"
    )
    p_verify.add_argument(
        "--level-samples", type=int, default=1000, help="level-set samples per sampled property"
    )
    p_verify.add_argument("--lemma-cases", type=int, default=100, help="randomized lemma cases")
    p_verify.add_argument(
        "--inject-bug",
        choices=("sigma09",),
        default=None,
        help="self-test: scale sigma by 0.9 so the bound property must fail",
    )
    _add_common(p_verify)
    p_verify.set_defaults(func=cmd_verify)

    p_spec = sub.add_parser("spectrum", help="print a parsed or solved spectrum")
    _add_problem_source(p_spec)
    _add_common(p_spec)
    p_spec.set_defaults(func=cmd_spectrum)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NotPositiveDefiniteError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
