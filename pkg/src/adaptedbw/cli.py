"""Command-line interface: ``abw {distance,barycenter,ar1,simulate,experiment}``.

Exit codes: 0 success, 1 invalid input or I/O failure, 2 a checked identity
or golden value failed, 3 a solver did not converge. Human-readable messages
go to stderr; machine output goes to stdout or files.
"""

import argparse
import contextlib
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import io
from .barycenter import (
    BarycenterProblem,
    SolverConfig,
    classical_bw_barycenter,
    sign_oracle_1d,
    solve_by_columns,
    solve_fixed_point,
)
from .errors import AdaptedBWError
from .experiments import run_sec5, run_sec6
from .metrics import abw_distance, abw_via_columns, aw2_distance
from .process import GaussianProcess, ar1_factor, covariance
from .simulate import marginal_variances, sample_paths

log = logging.getLogger("adaptedbw")

EXIT_OK, EXIT_INPUT, EXIT_CHECK, EXIT_NOT_CONVERGED = 0, 1, 2, 3
DECOMPOSITION_TOL = 1e-7


class UsageError(Exception):
    pass


def _thread_limit():
    raw = os.environ.get("ABW_THREADS", "").strip()
    if not raw:
        return contextlib.nullcontext()
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"ABW_THREADS must be a non-negative integer, got {raw!r}") from None
    if n < 0:
        raise UsageError(f"ABW_THREADS must be a non-negative integer, got {raw!r}")
    if n == 0:
        return contextlib.nullcontext()
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=n)


def _emit(payload, out):
    text = io.dumps(payload)
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _config(args):
    return SolverConfig(
        tolerance=args.tol,
        max_iterations=args.max_iter,
        multistart=not getattr(args, "single_start", False),
    )


def _check_compatible(processes, paths):
    d0, T0 = processes[0].d, processes[0].T
    for p, path in zip(processes[1:], paths[1:]):
        if p.d != d0:
            raise UsageError(f"{path}: d mismatch ({p.d} vs {d0} in {paths[0]})")
        if p.T != T0:
            raise UsageError(f"{path}: T mismatch ({p.T} vs {T0} in {paths[0]})")


def _parse_weights(text, n):
    if text is None or text == "uniform":
        return np.full(n, 1.0 / n)
    try:
        w = np.array([float(x) for x in text.split(",")])
    except ValueError:
        raise UsageError(f"--weights: cannot parse {text!r}") from None
    if w.size != n:
        raise UsageError(f"--weights: got {w.size} weights for {n} inputs")
    for i, x in enumerate(w):
        if not (np.isfinite(x) and x > 0):
            raise UsageError(f"--weights: weight {i + 1} = {x} must be positive")
    if abs(w.sum() - 1.0) > 1e-12:
        log.warning("weights sum to %r; normalizing", float(w.sum()))
        w = w / w.sum()
    return w


def cmd_distance(args):
    X, Y = io.load_process(args.inputs[0]), io.load_process(args.inputs[1])
    _check_compatible([X, Y], args.inputs)
    abw = abw_distance(X.factor, Y.factor)
    via = abw_via_columns(X.factor, Y.factor)
    payload = {
        "aw2": aw2_distance(X, Y),
        "abw": abw,
        "abw_via_columns": via,
        "mean_gap": float(np.linalg.norm(X.mean - Y.mean)),
    }
    _emit(payload, args.out)
    if args.check_decomposition:
        gap = abs(abw**2 - via**2)
        if gap > DECOMPOSITION_TOL * max(1.0, abw**2):
            log.error("decomposition identity violated: |abw^2 - sum_t bw^2| = %.3e", gap)
            return EXIT_CHECK
    return EXIT_OK


def cmd_barycenter(args):
    processes = [io.load_process(p) for p in args.inputs]
    _check_compatible(processes, args.inputs)
    weights = _parse_weights(args.weights, len(processes))
    problem = BarycenterProblem.from_processes(processes, weights)
    config = _config(args)
    if args.method == "fixed-point":
        result = solve_fixed_point(problem, config)
    elif args.method == "columns":
        result = solve_by_columns(problem, config)
    else:
        if problem.d != 1:
            raise UsageError("--method oracle-1d needs d = 1 inputs")
        result = sign_oracle_1d(problem)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    io.write_json(
        out / "barycenter.json", io.process_to_dict(GaussianProcess(result.mean, result.factor))
    )
    diagnostics = dict(result.diagnostics(), method=args.method, weights=weights.tolist())
    io.write_json(out / "diagnostics.json", diagnostics)

    status = EXIT_OK if result.converged else EXIT_NOT_CONVERGED
    if args.classical_compare:
        classical = classical_bw_barycenter(
            [covariance(p.factor) for p in processes], weights, config
        )
        io.write_matrix_csv(out / "classical_covariance.csv", classical.covariance)
        var_abw = marginal_variances(result.factor)
        d, T = problem.d, problem.T
        var_bw = np.diag(classical.covariance).reshape(T, d).sum(axis=1)
        io.write_table_csv(
            out / "comparison.csv",
            ["t", "var_abw", "var_bw"],
            [[t + 1, var_abw[t], var_bw[t]] for t in range(T)],
        )
        if not classical.converged:
            status = EXIT_NOT_CONVERGED
    if status == EXIT_NOT_CONVERGED:
        log.error("solver did not converge (residual %.3e)", result.residual)
    return status


def cmd_ar1(args):
    spec = io.load_ar1(args.spec)
    L = ar1_factor(spec)
    _emit(io.process_to_dict(GaussianProcess.centered(L)), args.out)
    return EXIT_OK


def cmd_simulate(args):
    process = io.load_process(args.input)
    if args.paths < 1:
        raise UsageError("--paths must be >= 1")
    X = sample_paths(process, args.paths, args.seed)
    rows = [[p + 1] + list(X[p]) for p in range(X.shape[0])]
    header = io.path_header(process.d, process.T)
    if args.out:
        io.write_table_csv(args.out, header, rows)
    else:
        io.write_table(sys.stdout, header, rows)
    return EXIT_OK


def cmd_experiment(args):
    config = _config(args)
    if args.name == "sec5":
        summary = run_sec5(args.out, config)
    else:
        summary = run_sec6(args.out, seed=args.seed, n_paths=args.paths, config=config)
    for check in summary["checks"]:
        if not check["passed"]:
            log.warning("%s check '%s' failed: %s", args.name, check["name"], check["value"])
    sys.stdout.write(io.dumps({"experiment": args.name, "passed": summary["passed"], "out": str(args.out)}))
    if args.name == "sec5" and not summary["passed"]:
        return EXIT_CHECK
    return EXIT_OK


def _add_solver_flags(p):
    p.add_argument("--tol", type=float, default=None, help="stopping tolerance (Frobenius step)")
    p.add_argument("--max-iter", type=int, default=10000)
    p.add_argument(
        "--single-start",
        action="store_true",
        help="run the alternating scheme from the weighted mean only",
    )


def build_parser():
    parser = argparse.ArgumentParser(
        prog="abw", description="Adapted Bures-Wasserstein distances and barycenters."
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("distance", help="distances between two process JSON files")
    p.add_argument("inputs", nargs=2)
    p.add_argument("--out", default=None, help="write JSON here instead of stdout")
    p.add_argument("--check-decomposition", action="store_true")
    p.set_defaults(func=cmd_distance)

    p = sub.add_parser("barycenter", help="barycenter of N process JSON files")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--weights", default="uniform", help="comma-separated weights or 'uniform'")
    p.add_argument("--method", choices=["fixed-point", "columns", "oracle-1d"], default="fixed-point")
    p.add_argument("--classical-compare", action="store_true")
    p.add_argument("--out", required=True, help="output directory")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_barycenter)

    p = sub.add_parser("ar1", help="process JSON from an AR(1) spec")
    p.add_argument("spec")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_ar1)

    p = sub.add_parser("simulate", help="sample paths as CSV")
    p.add_argument("input")
    p.add_argument("--paths", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("experiment", help="reproduce an experiment bundle")
    p.add_argument("name", choices=["sec5", "sec6"])
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--paths", type=int, default=5, help="sample paths per process (sec6)")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    if not 0 <= getattr(args, "seed", 0) < 2**64:
        log.error("--seed must be an unsigned 64-bit integer")
        return EXIT_INPUT
    try:
        with _thread_limit():
            return args.func(args)
    except (AdaptedBWError, UsageError) as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    except OSError as exc:
        log.error("I/O error: %s", exc)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
