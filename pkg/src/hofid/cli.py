"""Command-line front end: solve catalog problems and reproduce reference tables.

Exit status is 0 on success, 2 when any run fails to converge (or a
reproduced row misses its tolerance) and 1 on usage errors.
"""
import argparse
import csv
import io
import json
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .adapt import GUARDS, SolverConfig, solve
from .discretize import POLICIES
from .exceptions import HofidError, ProblemDefinitionError
from .problem import CATALOG, catalog
from .reference import TABLES

SCHEMA = "hofid.result/1"
EXIT_OK, EXIT_USAGE, EXIT_NONCONVERGED = 0, 1, 2

log = logging.getLogger("hofid")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; 2 is reserved for non-convergence here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunRequest:
    problem: str
    ks: list
    params: dict = field(default_factory=dict)
    orders: Optional[tuple] = None
    tols: Optional[tuple] = None
    n0: Optional[int] = None
    policy: Optional[str] = None
    fmt: str = "json"
    out: Optional[str] = None
    verbose: bool = False
    jobs: int = 1
    guard: Optional[str] = None

    def __post_init__(self):
        if not self.ks or any(k < 0 for k in self.ks):
            raise UsageError("k must be a nonnegative integer")
        if self.fmt not in ("json", "csv", "table"):
            raise UsageError(f"unknown format {self.fmt!r}")

    def config(self):
        kw = {}
        if self.orders is not None:
            kw["orders"] = self.orders
            if self.tols is None:
                # the last stage ends at 1e-8, earlier ones 100x looser each
                L = len(self.orders)
                kw["tols"] = tuple(10.0 ** -(8 - 2 * (L - 1 - i)) for i in range(L))
        if self.tols is not None:
            kw["tols"] = self.tols
        if self.n0 is not None:
            kw["n0"] = self.n0
        if self.policy is not None:
            kw["policy"] = self.policy
        if self.guard is not None:
            kw["guard"] = self.guard
        try:
            return SolverConfig(**kw)
        except ValueError as exc:
            raise UsageError(str(exc)) from None


def _int_list(text):
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text):
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _k_range(text):
    lo, sep, hi = text.partition("..")
    try:
        if not sep:
            raise ValueError
        a, b = int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a range like 0..5, got {text!r}")
    if b < a:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return list(range(a, b + 1))


def _param(text):
    name, sep, value = text.partition("=")
    if not sep or not name:
        raise argparse.ArgumentTypeError(f"expected name=value, got {text!r}")
    try:
        return name, float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"parameter {name} needs a numeric value")


def build_parser():
    ap = _Parser(prog="hofid", description=__doc__.splitlines()[0])
    ap.add_argument("--problem", choices=sorted(CATALOG), help="catalog problem")
    ap.add_argument("--param", type=_param, action="append", default=[], metavar="NAME=VALUE",
                    help="problem parameter, repeatable (e.g. c=5)")
    ks = ap.add_mutually_exclusive_group()
    ks.add_argument("-k", type=int, dest="k", help="eigenvalue index (0-based)")
    ks.add_argument("--k-range", type=_k_range, metavar="A..B", help="inclusive index range")
    ap.add_argument("--orders", type=_int_list, help="order cascade, e.g. 4,6,8")
    ap.add_argument("--tols", type=_float_list, help="stage tolerances, e.g. 1e-4,1e-6,1e-8")
    ap.add_argument("--n0", type=int, help="intervals of the initial uniform grid")
    ap.add_argument("--delta", type=float, help="truncation offset at singular ends")
    ap.add_argument("--endpoint-policy", choices=POLICIES, dest="policy",
                    help="eliminate truncated singular ends or keep an equation row there")
    ap.add_argument("--guard", choices=GUARDS,
                    help="stopping test: companion E_r/E_a (default) or residual norm")
    ap.add_argument("--format", choices=("json", "csv", "table"), dest="fmt",
                    help="output format (default: json, or table with --repro)")
    ap.add_argument("--out", help="output file (default: stdout)")
    ap.add_argument("--jobs", type=int, default=1, help="worker processes for a k-range")
    ap.add_argument("--repro", type=int, choices=sorted(TABLES),
                    help="rerun a reference table and compare")
    ap.add_argument("--verbose", "-v", action="store_true", help="per-iteration trace on stderr")
    return ap


def request_from_args(args):
    params = dict(args.param)
    if args.delta is not None:
        params["delta"] = args.delta
    if args.k is not None:
        ks = [args.k]
    elif args.k_range is not None:
        ks = args.k_range
    else:
        ks = [0]
    return RunRequest(problem=args.problem, ks=ks, params=params, orders=args.orders,
                      tols=args.tols, n0=args.n0, policy=args.policy, fmt=args.fmt,
                      out=args.out, verbose=args.verbose, jobs=max(1, args.jobs),
                      guard=args.guard)


def _trace_printer(rec):
    print(f"  p={rec.order:<2d} it={rec.iteration:<2d} n={rec.n:<6d} lambda={rec.lam:.15g} "
          f"|e|={rec.err_norm:.2e} E_r={rec.E_r:.2e} E_a={rec.E_a:.2e}", file=sys.stderr)


def _solve_one(problem_name, params, k, config, verbose):
    problem = catalog(problem_name, **params)
    return solve(problem, k, config, on_iteration=_trace_printer if verbose else None)


def _solve_detached(problem_name, params, k, config):
    # coefficient closures do not pickle; the parent reattaches the problem
    sol = _solve_one(problem_name, params, k, config, False)
    sol.problem = None
    return sol


def _run_error(problem, k, exc):
    return {"problem": problem.to_dict(), "k": k, "converged": False,
            "error": f"{type(exc).__name__}: {exc}"}


def run_solutions(req):
    """Solve every requested index; returns (k, Solution or exception) sorted by k."""
    try:
        problem = catalog(req.problem, **req.params)
    except ProblemDefinitionError as exc:
        raise UsageError(str(exc)) from None
    config = req.config()
    results = {}
    if req.jobs > 1 and len(req.ks) > 1:
        with ProcessPoolExecutor(max_workers=req.jobs) as pool:
            futs = {k: pool.submit(_solve_detached, req.problem, req.params, k, config)
                    for k in req.ks}
            for k, fut in futs.items():
                try:
                    results[k] = fut.result()
                    results[k].problem = problem
                except HofidError as exc:
                    results[k] = exc
    else:
        for k in req.ks:
            if req.verbose:
                print(f"{req.problem} k={k}", file=sys.stderr)
            try:
                results[k] = _solve_one(req.problem, req.params, k, config, req.verbose)
            except HofidError as exc:
                results[k] = exc
    return problem, [(k, results[k]) for k in sorted(results)]


def json_document(problem, outcomes):
    runs = []
    for k, res in outcomes:
        if isinstance(res, Exception):
            runs.append(_run_error(problem, k, res))
            continue
        d = res.to_dict()
        for h in d["history"]:
            h["lam"] = float(f"{h['lam']:.15e}")
        runs.append(d)
    return {"schema": SCHEMA, "generated": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
            "runs": runs}


def csv_text(sol):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "y", "h"])
    x, y = sol.x, sol.y
    for i in range(len(x)):
        h = "" if i == 0 else repr(float(x[i] - x[i - 1]))
        w.writerow([repr(float(x[i])), repr(float(y[i])), h])
    return buf.getvalue()


def table_text(outcomes):
    lines = [f"{'k':>4} {'lambda':>24} {'n':>7} {'E_r':>9} {'E_a':>9}  status"]
    for k, res in outcomes:
        if isinstance(res, Exception):
            lines.append(f"{k:>4} {'-':>24} {'-':>7} {'-':>9} {'-':>9}  error: {res}")
            continue
        status = "ok" if res.converged else "NOT CONVERGED"
        lines.append(f"{k:>4} {res.lam:>24.15e} {res.n:>7d} {res.E_r:>9.2e} {res.E_a:>9.2e}"
                     f"  {status}")
    return "\n".join(lines) + "\n"


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def run(req):
    """Execute a request and write its artifacts; returns the exit status."""
    problem, outcomes = run_solutions(req)
    if req.fmt == "json":
        _emit(json.dumps(json_document(problem, outcomes), indent=2) + "\n", req.out)
    elif req.fmt == "table":
        _emit(table_text(outcomes), req.out)
    else:
        for k, res in outcomes:
            if isinstance(res, Exception):
                print(f"k={k}: {type(res).__name__}: {res}", file=sys.stderr)
                continue
            out = req.out
            if out is not None and len(outcomes) > 1:
                p = Path(out)
                out = str(p.with_name(f"{p.stem}_k{k}{p.suffix or '.csv'}"))
            elif out is None and len(outcomes) > 1:
                sys.stdout.write(f"# k={k}\n")
            _emit(csv_text(res), out)
    ok = all(not isinstance(r, Exception) and r.converged for _, r in outcomes)
    return EXIT_OK if ok else EXIT_NONCONVERGED


@dataclass
class ReproRow:
    k: int
    orders: tuple
    lam: Optional[float]
    ref: float
    n: Optional[int]
    ref_n: Optional[int]
    E_r: Optional[float]
    E_a: Optional[float]
    within: bool
    converged: bool
    error: Optional[str] = None

    @property
    def diff(self):
        return None if self.lam is None else self.lam - self.ref


def repro_rows(number, verbose=False):
    table = TABLES[number]
    params = dict(table.params)
    if table.delta is not None:
        params["delta"] = table.delta
    problem = catalog(table.problem, **params)
    rows = []
    for ref in table.rows:
        cfg = SolverConfig(orders=ref.orders, tols=ref.tols, n0=table.n0)
        try:
            sol = solve(problem, ref.k, cfg, on_iteration=_trace_printer if verbose else None)
        except HofidError as exc:
            rows.append(ReproRow(ref.k, ref.orders, None, ref.lam, None, ref.n, None, None,
                                 False, False, f"{type(exc).__name__}: {exc}"))
            continue
        rows.append(ReproRow(ref.k, ref.orders, sol.lam, ref.lam, sol.n, ref.n, sol.E_r,
                             sol.E_a, abs(sol.lam - ref.lam) <= ref.atol, sol.converged))
    return table, rows


def repro_text(table, rows):
    head = (f"Table {table.number}: {table.title} (n0={table.n0}"
            + (f", delta={table.delta:g}" if table.delta is not None else "") + ")")
    lines = [head,
             f"{'k':>3} {'p':>7} {'computed':>22} {'reference':>22} {'|diff|':>9} "
             f"{'n':>6} {'ref n':>6} {'E_r':>9} {'E_a':>9}  flag"]
    for r in rows:
        p = "-".join(map(str, r.orders))
        if r.error is not None:
            lines.append(f"{r.k:>3} {p:>7} {'-':>22} {r.ref:>22.15g} {'-':>9} {'-':>6} "
                         f"{r.ref_n or '-':>6} {'-':>9} {'-':>9}  FAILED {r.error}")
            continue
        flag = "ok" if r.within else "OUTSIDE TOL"
        if not r.converged:
            flag += " (not converged)"
        lines.append(f"{r.k:>3} {p:>7} {r.lam:>22.15g} {r.ref:>22.15g} {abs(r.diff):>9.2e} "
                     f"{r.n:>6d} {r.ref_n or '-':>6} {r.E_r:>9.2e} {r.E_a:>9.2e}  {flag}")
    return "\n".join(lines) + "\n"


def repro(number, out=None, fmt="table", verbose=False):
    table, rows = repro_rows(number, verbose)
    if fmt == "json":
        doc = {"schema": SCHEMA + "+repro", "table": number, "problem": table.problem,
               "rows": [{"k": r.k, "orders": list(r.orders),
                         "lambda": None if r.lam is None else float(f"{r.lam:.15e}"),
                         "reference": r.ref, "abs_diff": None if r.lam is None else abs(r.diff),
                         "n": r.n, "reference_n": r.ref_n, "E_r": r.E_r, "E_a": r.E_a,
                         "within_tolerance": r.within, "converged": r.converged,
                         "error": r.error} for r in rows]}
        _emit(json.dumps(doc, indent=2) + "\n", out)
    else:
        _emit(repro_text(table, rows), out)
    return EXIT_OK if all(r.within and r.converged for r in rows) else EXIT_NONCONVERGED


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        if args.repro is not None:
            if args.fmt == "csv":
                raise UsageError("--repro supports --format table or json")
            return repro(args.repro, args.out, args.fmt or "table", args.verbose)
        if args.problem is None:
            raise UsageError("--problem is required (or use --repro)")
        args.fmt = args.fmt or "json"
        return run(request_from_args(args))
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"hofid: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
