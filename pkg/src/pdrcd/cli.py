"""Command-line front end: ``analyze``, ``solve`` and ``bench``.

Exit codes: 0 success, 1 bound or assertion violation, 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import generators
from .analyzer import check_theorem_bounds, recommend
from .errors import BoundViolated, RCDError
from .losses import LOSSES, make_loss
from .matrix import normalize_columns, read_libsvm, stats
from .sampling import importance, importance_weights, uniform
from .solvers import StoppingRule, reference_optimum, solve_dual, solve_primal

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2


class UsageError(Exception):
    pass


def parse_lambda(text, n):
    """``"0.01"``, ``"1/n"`` or ``"c/n"`` resolved against ``n``."""
    t = str(text).strip().replace(" ", "")
    if t.endswith("/n"):
        coef = t[:-2] or "1"
        try:
            value = float(coef) / n
        except ValueError:
            raise UsageError(f"bad --lambda {text!r}") from None
    else:
        try:
            value = float(t)
        except ValueError:
            raise UsageError(f"bad --lambda {text!r}; use a number or 1/n") from None
    if not (value > 0 and math.isfinite(value)):
        raise UsageError(f"--lambda must be positive, got {text!r}")
    return value


def _labels(kind, n, seed):
    if kind == "alternating":
        return generators.alternating_labels(n)
    return generators.random_labels(n, seed)


def load_problem(args):
    """``(X, labels)`` from ``--libsvm`` or ``--gen``, normalized if requested."""
    if bool(args.libsvm) == bool(args.gen):
        raise UsageError("give exactly one of --libsvm PATH or --gen SPEC")
    if args.libsvm:
        X, y = read_libsvm(args.libsvm)
        if getattr(args, "labels", None) == "random":
            y = _labels("random", X.n, args.seed)
    else:
        try:
            X = generators.from_spec(args.gen, seed=args.seed)
        except (ValueError, RCDError) as exc:
            raise UsageError(str(exc)) from exc
        y = _labels(getattr(args, "labels", None) or "alternating", X.n, args.seed)
    if args.normalize:
        X = normalize_columns(X)
    return X, np.asarray(y, dtype=np.float64)


def _add_input(p):
    p.add_argument("--libsvm", metavar="PATH", help="LIBSVM file (columns are examples)")
    p.add_argument("--gen", metavar="SPEC", help="generator spec, see below")
    p.add_argument("--lambda", dest="lam", default="1/n", help="number or 1/n (default 1/n)")
    p.add_argument("--normalize", action=argparse.BooleanOptionalAction, default=True,
                   help="scale columns to unit average norm (default on)")
    p.add_argument("--seed", type=int, default=0, help="seed for generators, labels and sampling")


def cmd_analyze(args, out):
    X, _ = load_problem(args)
    lam = parse_lambda(args.lam, X.n)
    report = recommend(X, lam, args.beta)
    print(report.format(), file=out)
    print(report.record(), file=out)
    if args.record:
        with open(args.record, "w", encoding="utf-8") as fh:
            fh.write(report.record() + "\n")
    bounds = check_theorem_bounds(X, raise_on_violation=False)
    for c in bounds.checks:
        if not c.holds:
            print(f"bound violated: {c.name}: {c.lhs!r} > {c.rhs!r}", file=sys.stderr)
    return EXIT_OK if bounds.ok else EXIT_VIOLATION


def _stopping(args, reference):
    return StoppingRule(
        target_subopt=args.stop_subopt,
        reference=reference,
        target_gap=args.stop_gap,
        max_passes=args.max_passes,
        max_time=args.max_time,
    )


def _sampling(kind, X, side, lam, beta):
    st = stats(X)
    sq, m = (st.row_sqnorm, X.d) if side == "primal" else (st.col_sqnorm, X.n)
    if kind == "uniform":
        return uniform(m)
    return importance(importance_weights(sq, lam, X.n, beta))


def _trace_paths(base, sides):
    if len(sides) == 1:
        return {sides[0]: base}
    root, ext = os.path.splitext(base)
    return {s: f"{root}.{s}{ext or '.csv'}" for s in sides}


def cmd_solve(args, out):
    X, y = load_problem(args)
    lam = parse_lambda(args.lam, X.n)
    loss = make_loss(args.loss, y)
    sides = ["primal", "dual"] if args.both or args.side == "both" else [args.side]
    reference = None
    if args.stop_subopt is not None or (args.stop_gap is not None and "primal" in sides):
        reference = reference_optimum(X, loss, lam).primal
    if args.stop_gap is None and args.stop_subopt is None and args.max_passes is None and args.max_time is None:
        args.max_passes = 100.0
    paths = _trace_paths(args.trace, sides) if args.trace else {}
    status = EXIT_OK
    for side in sides:
        sampling = _sampling(args.sampling, X, side, lam, loss.beta)
        stop = _stopping(args, reference)
        if side == "primal":
            if stop.target_gap is not None:
                # no dual iterate on this side: P(w) - P* is bounded by any gap, so use it instead
                subopt = [t for t in (stop.target_subopt, stop.target_gap) if t is not None]
                stop.target_subopt, stop.target_gap = min(subopt), None
            _, trace = solve_primal(X, loss, lam, sampling=sampling, stop=stop, seed=args.seed)
        else:
            _, _, trace = solve_dual(X, loss, lam, sampling=sampling, stop=stop, seed=args.seed)
            if trace.meta["weak_duality_violations"]:
                print(f"dual: weak duality violated on {trace.meta['weak_duality_violations']} rows",
                      file=sys.stderr)
                status = EXIT_VIOLATION
        last = trace.last
        gap = "" if last["gap"] is None else f" gap={last['gap']:.3e}"
        print(f"{side}: stop={trace.stop_reason} passes={last['passes']:.4g} "
              f"primal={last['primal_obj']:.12g}{gap}", file=out)
        if side in paths:
            trace.to_csv(paths[side])
            print(f"{side}: trace written to {paths[side]}", file=out)
    return status


# --- bench ----------------------------------------------------------------


def _bench_run(job):
    """One (cell, seed, side) run; returns a summary row, never raises."""
    cell, d, n, pct, seed, side, opts = job
    row = {"cell": cell, "seed": seed, "side": side, "passes": "DNF", "status": "ok"}
    try:
        X, y = _bench_problem(d, n, pct, opts)
        lam = 1.0 / n
        loss = make_loss(opts["loss"], y)
        ref = reference_optimum(X, loss, lam)
        p0 = loss.primal_objective(np.zeros(n), np.zeros(d), lam)
        target = opts["target"] * max(p0 - ref.primal, 0.0)
        stop = StoppingRule(target_subopt=target, reference=ref.primal,
                            max_passes=opts["max_passes"], check_every_passes=opts["check_every"])
        if side == "primal":
            _, trace = solve_primal(X, loss, lam, stop=stop, seed=seed)
        else:
            _, _, trace = solve_dual(X, loss, lam, stop=stop, seed=seed)
        if trace.stop_reason == "target_subopt":
            row["passes"] = repr(float(trace.last["passes"]))
        path = os.path.join(opts["out"], f"{cell}_seed{seed}_{side}.csv")
        trace.to_csv(path)
    except Exception as exc:  # a failed cell is reported, the grid keeps going
        row["status"] = f"error: {type(exc).__name__}: {exc}"
    return row


def _bench_problem(d, n, pct, opts):
    X = generators.from_spec(f"worst-dual:{d}x{n}:nnz={pct}%", seed=opts["data_seed"])
    if opts["normalize"]:
        X = normalize_columns(X)
    return X, _labels(opts["labels"], n, opts["data_seed"])


def _cell_name(d, n, pct):
    return f"d{d}_n{n}_nnz{pct:g}"


def _float_list(text):
    return [float(t) for t in text.split(",") if t]


def _int_list(text):
    return [int(t) for t in text.split(",") if t]


def cmd_bench(args, out):
    os.makedirs(args.out, exist_ok=True)
    opts = {
        "loss": args.loss, "target": args.target, "max_passes": args.max_passes,
        "check_every": args.check_every, "normalize": args.normalize,
        "labels": args.labels, "data_seed": args.data_seed, "out": args.out,
    }
    cells = [(args.d, n, pct) for n in args.n for pct in args.nnz]
    seeds = list(range(args.seed, args.seed + args.seeds))
    jobs = [
        (_cell_name(d, n, pct), d, n, pct, s, side, opts)
        for (d, n, pct), s, side in itertools.product(cells, seeds, ("primal", "dual"))
    ]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_bench_run, jobs))
    else:
        results = [_bench_run(j) for j in jobs]
    by_key = {(r["cell"], r["seed"], r["side"]): r for r in results}

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["cell", "d", "n", "nnz_pct", "seed", "primal_passes", "dual_passes",
                     "ratio", "rec", "status"])
    for d, n, pct in cells:
        cell = _cell_name(d, n, pct)
        try:
            X, _ = _bench_problem(d, n, pct, opts)
            report = recommend(X, 1.0 / n, LOSSES[args.loss].beta)
            ratio, rec = f"{report.ratio:.6g}", report.recommendation
        except Exception as exc:
            ratio, rec = "", f"error: {type(exc).__name__}"
        for s in seeds:
            rp, rd = by_key[(cell, s, "primal")], by_key[(cell, s, "dual")]
            errors = [r["status"] for r in (rp, rd) if r["status"] != "ok"]
            writer.writerow([cell, d, n, f"{pct:g}", s, rp["passes"], rd["passes"],
                             ratio, rec, "; ".join(errors) or "ok"])
    summary = os.path.join(args.out, "summary.csv")
    with open(summary, "w", encoding="utf-8") as fh:
        fh.write(buf.getvalue())
    out.write(buf.getvalue())
    print(f"summary written to {summary}", file=out)
    return EXIT_OK


# --- entry point ----------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="pdrcd",
        description="Primal vs dual randomized coordinate descent for L2-regularized ERM.",
        epilog=generators.GENERATOR_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    pa = sub.add_parser("analyze", help="predict which method is cheaper",
                        epilog=generators.GENERATOR_HELP,
                        formatter_class=argparse.RawDescriptionHelpFormatter)
    _add_input(pa)
    pa.add_argument("--beta", type=float, default=1.0, help="loss smoothness (default 1)")
    pa.add_argument("--record", metavar="PATH", help="also write the key=value record here")
    pa.set_defaults(func=cmd_analyze)

    ps = sub.add_parser("solve", help="run primal and/or dual RCD",
                        epilog=generators.GENERATOR_HELP,
                        formatter_class=argparse.RawDescriptionHelpFormatter)
    _add_input(ps)
    ps.add_argument("--side", choices=("primal", "dual", "both"), default="dual")
    ps.add_argument("--both", action="store_true", help="same as --side both")
    ps.add_argument("--loss", choices=sorted(LOSSES), default="squared")
    ps.add_argument("--labels", choices=("alternating", "random"), default=None,
                    help="labels for generated data (default alternating); "
                         "'random' also replaces file labels")
    ps.add_argument("--sampling", choices=("uniform", "importance"), default="importance")
    ps.add_argument("--stop-gap", type=float, help="stop when the duality gap is below this (dual)")
    ps.add_argument("--stop-subopt", type=float,
                    help="stop when P(w) - P* is below this; P* from a reference solve")
    ps.add_argument("--max-passes", type=float)
    ps.add_argument("--max-time", type=float, help="seconds")
    ps.add_argument("--trace", metavar="PATH", help="trace CSV (two files with --side both)")
    ps.set_defaults(func=cmd_solve)

    pb = sub.add_parser("bench", help="passes-to-target on worst-case-for-dual instances")
    pb.add_argument("--d", type=int, default=100)
    pb.add_argument("--n", type=_int_list, default=[100, 1000, 10000], help="comma list")
    pb.add_argument("--nnz", type=_float_list, default=[1.0, 10.0, 100.0],
                    help="comma list of percentages")
    pb.add_argument("--seeds", type=int, default=1, help="number of solver seeds per cell")
    pb.add_argument("--seed", type=int, default=0, help="first solver seed")
    pb.add_argument("--data-seed", type=int, default=0, help="seed for the matrix and labels")
    pb.add_argument("--loss", choices=sorted(LOSSES), default="logistic")
    pb.add_argument("--labels", choices=("alternating", "random"), default="random")
    pb.add_argument("--normalize", action=argparse.BooleanOptionalAction, default=True)
    pb.add_argument("--target", type=float, default=1e-6,
                    help="relative suboptimality target, (P - P*) / (P(0) - P*)")
    pb.add_argument("--max-passes", type=float, default=300.0)
    pb.add_argument("--check-every", type=float, default=0.05, help="passes between checks")
    pb.add_argument("--jobs", type=int, default=1)
    pb.add_argument("--out", default="bench_out", help="output directory")
    pb.set_defaults(func=cmd_bench)
    return parser


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args, out)
    except (BoundViolated, AssertionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    except (UsageError, OSError, ValueError, RCDError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
