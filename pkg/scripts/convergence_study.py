"""Empirical convergence orders on uniform meshes and adaptive mesh sizes vs tolerance.

The first part refines uniform sine meshes and prints the observed order of the
eigenvalue error for p = 2, 4, 6, 8.  The second part runs the adaptive solver at
fixed order on the Pruess problem for a range of tolerances.
"""
import argparse
import math

import numpy as np

from hofid.adapt import SolverConfig, solve
from hofid.discretize import Grid, assemble
from hofid.eigen import eig_compute, init_approx
from hofid.problem import catalog


def uniform_errors(p, ns, k):
    pr = catalog("sine")
    exact = (k + 1) ** 2
    errs = []
    for n in ns:
        op = assemble(pr, Grid.uniform(0, math.pi, n), p)
        pair, _ = init_approx(pr, k, n)
        inc, _ = eig_compute(op, pair.lam, pair.Y, expected_k=k, tol=1e-15)
        errs.append(abs(pair.lam + inc - exact) / exact)
    return np.array(errs)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("-k", type=int, default=14, help="sine mode (default 14)")
    ap.add_argument("--n-min", type=int, default=48)
    ap.add_argument("--levels", type=int, default=8)
    ap.add_argument("--ratio", type=float, default=math.sqrt(2))
    args = ap.parse_args(argv)

    ns = [int(round(args.n_min * args.ratio**i)) for i in range(args.levels)]
    print(f"uniform meshes, sine k={args.k}, relative eigenvalue error")
    print(f"{'n':>6} " + " ".join(f"{'p=' + str(p):>10} {'order':>6}" for p in (2, 4, 6, 8)))
    table = {p: uniform_errors(p, ns, args.k) for p in (2, 4, 6, 8)}
    for i, n in enumerate(ns):
        cells = []
        for p in (2, 4, 6, 8):
            e = table[p]
            rate = "" if i == 0 else f"{math.log(e[i - 1] / e[i]) / math.log(n / ns[i - 1]):6.2f}"
            cells.append(f"{e[i]:10.2e} {rate:>6}")
        print(f"{n:>6} " + " ".join(cells))

    print("\nadaptive fixed-order runs, Pruess k=4")
    print(f"{'tol':>8} " + " ".join(f"{'n(p=' + str(p) + ')':>8}" for p in (4, 6, 8)))
    for tol in (1e-4, 1e-6, 1e-8, 1e-10):
        sizes = []
        for p in (4, 6, 8):
            sol = solve(catalog("pruess"), 4, SolverConfig(orders=(p,), tols=(tol,), n0=21))
            sizes.append(f"{sol.n:>8d}" if sol.converged else f"{str(sol.n) + '*':>8}")
        print(f"{tol:>8.0e} " + " ".join(sizes))
    print("(* = not converged)")


if __name__ == "__main__":
    main()
