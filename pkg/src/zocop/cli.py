"""Command-line surface.

Subcommands: svm, tsvm, mlc, mrc, solve, diagnose, oracle-check. Results go
to stdout as flat key=value lines; errors to stderr. Exit codes: 0 stationary
point reached / diagnostics hold, 2 not converged (or diagnostics fail),
3 validation error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from typing import List, Optional

import numpy as np

from . import apps, datafiles, oracle
from .exceptions import ParseError, RankDeficiencyError, ValidationError, ZocopError
from .ialm import SolveReport, SolveStatus, solve_problem, verify_descent_trace

EXIT_OK = 0
EXIT_NOT_CONVERGED = 2
EXIT_VALIDATION = 3
EXIT_IO = 4


class _CliArgumentError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would sys.exit(2); we need exit 3
        raise _CliArgumentError(f"{message}\n{self.format_usage()}")


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def _emit(pairs) -> None:
    for key, val in pairs:
        print(f"{key}={_fmt(val)}")


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--mu", type=float, default=1.0)
    parser.add_argument("--mode", choices=("certified", "practical"), default="certified")
    parser.add_argument("--rho", type=float, default=None)
    parser.add_argument("--eta", type=float, default=None)
    parser.add_argument("--epsilon0", type=float, default=None)
    parser.add_argument("--t", type=float, default=None)
    parser.add_argument("--variant", choices=("case1", "case2"), default=None)
    parser.add_argument("--tol-outer", type=float, default=1e-6)
    parser.add_argument("--tol-feas", type=float, default=1e-6)
    parser.add_argument("--max-outer", type=int, default=500)
    parser.add_argument("--max-inner", type=int, default=10000)
    parser.add_argument("--trace", default=None)
    parser.add_argument(
        "--strict-rank", action="store_true",
        help="abort instead of warning when A is not full row rank",
    )
    parser.add_argument(
        "--seed", type=int, default=0,
        help="seed for sampling paths; solver runs are deterministic",
    )


def _solver_kwargs(args) -> dict:
    return dict(
        mu=args.mu,
        mode=args.mode,
        rho=args.rho,
        eta=args.eta,
        epsilon0=args.epsilon0,
        t=args.t,
        variant=args.variant,
        tol_outer=args.tol_outer,
        tol_feas=args.tol_feas,
        max_outer=args.max_outer,
        max_inner=args.max_inner,
        strict_rank=args.strict_rank,
    )


def _report_pairs(report: SolveReport):
    cert = report.certificate
    return [
        ("status", report.status.value),
        ("objective", report.objective),
        ("zero_one_loss", sum(1 for x in report.final.u if x > 0)),
        ("r_grad", cert.r_grad),
        ("r_prox", cert.r_prox),
        ("r_feas", cert.r_feas),
        ("max_residual", cert.max_residual),
        ("iterations", len(report.trace)),
    ]


def _finish(report: SolveReport, args, extra=()) -> int:
    if args.trace:
        datafiles.write_trace(report.trace, args.trace)
    _emit(_report_pairs(report) + list(extra))
    return EXIT_OK if report.status is SolveStatus.P_STATIONARY else EXIT_NOT_CONVERGED


def _cmd_svm(args) -> int:
    data = datafiles.read_libsvm(args.data)
    if data.y is None:
        raise ValidationError("svm needs single-label data")
    w, report = apps.solve_svm(data, args.lam, **_solver_kwargs(args))
    ev = apps.evaluate(w, data, "svm")
    return _finish(report, args, [("accuracy", ev.accuracy)])


def _cmd_tsvm(args) -> int:
    data = datafiles.read_libsvm(args.data)
    if data.y is None:
        raise ValidationError("tsvm needs single-label data")
    pos = data.X[data.y > 0]
    neg = data.X[data.y < 0]
    w1, w2, (rep1, rep2) = apps.solve_tsvm(
        pos, neg, (args.lambda1, args.lambda2, args.lambda3, args.lambda4),
        **_solver_kwargs(args),
    )
    Xb = apps.append_bias(data.X)
    d1 = np.abs(Xb @ w1) / max(np.linalg.norm(w1[:-1]), 1e-12)
    d2 = np.abs(Xb @ w2) / max(np.linalg.norm(w2[:-1]), 1e-12)
    pred = np.where(d1 <= d2, 1.0, -1.0)
    ok = rep1.status is SolveStatus.P_STATIONARY and rep2.status is SolveStatus.P_STATIONARY
    worst = rep1.status if rep1.status is not SolveStatus.P_STATIONARY else rep2.status
    _emit([
        ("status", worst.value),
        ("objective_pos", rep1.objective),
        ("objective_neg", rep2.objective),
        ("zero_one_loss", sum(1 for x in rep1.final.u if x > 0)
         + sum(1 for x in rep2.final.u if x > 0)),
        ("accuracy", float(np.mean(pred == data.y))),
        ("iterations", len(rep1.trace) + len(rep2.trace)),
    ])
    if args.trace:
        datafiles.write_trace(rep1.trace + rep2.trace, args.trace)
    return EXIT_OK if ok else EXIT_NOT_CONVERGED


def _cmd_mlc(args) -> int:
    data = datafiles.read_libsvm(args.data)
    if data.Y is None:
        raise ValidationError("mlc needs multilabel data (comma-separated labels)")
    W, reports = apps.solve_mlc(data, args.lam, jobs=args.jobs, **_solver_kwargs(args))
    ev = apps.evaluate(W, data, "mlc")
    ok = all(r.status is SolveStatus.P_STATIONARY for r in reports)
    _emit([
        ("status", "p_stationary" if ok else "not_converged"),
        ("labels", W.shape[1]),
        ("hamming_loss", ev.hamming_loss),
        ("zero_one_loss", ev.zero_one_objective),
        ("accuracy", ev.accuracy),
        ("iterations", sum(len(r.trace) for r in reports)),
    ])
    if args.trace:
        rows = [rec for r in reports for rec in r.trace]
        datafiles.write_trace(rows, args.trace)
    return EXIT_OK if ok else EXIT_NOT_CONVERGED


def _cmd_mrc(args) -> int:
    data = datafiles.read_csv_regression(args.data)
    w, report = apps.solve_mrc(
        data.X, data.y, args.lambda1, args.lambda2, args.xi, **_solver_kwargs(args)
    )
    return _finish(report, args)


def _cmd_solve(args) -> int:
    problem = datafiles.read_problem_file(args.problem)
    report = solve_problem(problem, **_solver_kwargs(args))
    return _finish(report, args)


def _cmd_diagnose(args) -> int:
    trace = datafiles.read_trace(args.trace)
    check = verify_descent_trace(trace, tau=args.mu / 4.0, eta=args.eta)
    _emit([
        ("holds", int(check.holds)),
        ("worst_violation", check.worst_violation),
        ("first_violation_k", -1 if check.first_violation_k is None
         else check.first_violation_k),
        ("final_steps_small", int(check.final_steps_small)),
        ("final_step_max", check.final_step_max),
    ])
    return EXIT_OK if check.holds else EXIT_NOT_CONVERGED


def _cmd_oracle_check(args) -> int:
    problem = datafiles.read_problem_file(args.problem)
    candidates = oracle.enumerate_stationary(problem, args.alpha, args.tol)
    report = solve_problem(
        problem,
        mu=args.mu,
        mode=args.mode,
        rho=args.rho,
        tol_outer=args.tol_outer,
        tol_feas=args.tol_feas,
        max_outer=args.max_outer,
        max_inner=args.max_inner,
        strict_rank=args.strict_rank,
    )
    final = report.final
    loss = sum(1 for x in final.u if x > 0)
    matched = -1
    best_dist = np.inf
    for i, cand in enumerate(candidates):
        dist = max(
            np.max(np.abs(cand.w - final.w)),
            np.max(np.abs(cand.u - final.u)),
            np.max(np.abs(cand.z - final.z)),
        )
        cand_loss = sum(1 for x in cand.u if x > 0)
        if dist <= 1e-5 and cand_loss == loss and dist < best_dist:
            matched, best_dist = i, dist
    _emit([
        ("status", report.status.value),
        ("candidates", len(candidates)),
        ("matched", int(matched >= 0)),
        ("match_index", matched),
        ("match_distance", 0.0 if matched < 0 else best_dist),
        ("objective", report.objective),
    ])
    return EXIT_OK if matched >= 0 else EXIT_NOT_CONVERGED


def build_parser() -> _Parser:
    parser = _Parser(prog="zocop", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("svm", help="train a zero-one-loss SVM from LIBSVM data")
    p.add_argument("--data", required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    _add_common(p)
    p.set_defaults(func=_cmd_svm)

    p = sub.add_parser("tsvm", help="train a twin SVM pair")
    p.add_argument("--data", required=True)
    for i in (1, 2, 3, 4):
        p.add_argument(f"--lambda{i}", type=float, required=True)
    _add_common(p)
    p.set_defaults(func=_cmd_tsvm)

    p = sub.add_parser("mlc", help="binary-relevance multi-label training")
    p.add_argument("--data", required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--jobs", type=int, default=1)
    _add_common(p)
    p.set_defaults(func=_cmd_mlc)

    p = sub.add_parser("mrc", help="ridge regression with rank-agreement term")
    p.add_argument("--data", required=True)
    p.add_argument("--lambda1", type=float, required=True)
    p.add_argument("--lambda2", type=float, required=True)
    p.add_argument("--xi", type=float, default=1e-3)
    _add_common(p)
    p.set_defaults(func=_cmd_mrc)

    p = sub.add_parser("solve", help="solve a problem file")
    p.add_argument("--problem", required=True)
    _add_common(p)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("diagnose", help="descent diagnostics for a trace CSV")
    p.add_argument("--trace", required=True)
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--eta", type=float, default=None)
    p.set_defaults(func=_cmd_diagnose)

    p = sub.add_parser(
        "oracle-check", help="compare the solver against exhaustive enumeration"
    )
    p.add_argument("--problem", required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--tol", type=float, default=1e-8)
    _add_common(p)
    p.set_defaults(func=_cmd_oracle_check)
    return parser


def run_cli(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _CliArgumentError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_VALIDATION
    except (ValidationError, RankDeficiencyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ZocopError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED


def main() -> None:
    sys.exit(run_cli())
