"""Write plotting data for eigenfunctions and stepsize profiles as CSV.

Produces mathieu_y0.csv and mathieu_y5.csv (Mathieu c=5, orders 6-8-10) with an
extra column holding |Y^(p) - Y^(p+2)| from the final companion solve, and
laguerre_y9.csv with both the transformed variable and the original x.
"""
import argparse
import csv
from pathlib import Path

import numpy as np

from hofid.adapt import SolverConfig, solve
from hofid.discretize import assemble
from hofid.eigen import eig_compute, normalize
from hofid.problem import Transform, catalog


def companion_difference(sol):
    """Pointwise |Y - Y'| where Y' is the order p+2 eigenvector on the same mesh."""
    order = sol.history[-1].order + 2
    op = assemble(sol.problem, sol.grid, order)
    inc, y = eig_compute(op, sol.lam, sol.Y, expected_k=sol.k)
    y = normalize(y, op.v)
    full = np.zeros(sol.grid.n + 1)
    full[op.rows] = y
    return np.abs(sol.y - full)


def write(path, header, columns):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in zip(*columns):
            w.writerow(["" if v is None else repr(float(v)) for v in row])
    print(f"wrote {path} ({len(columns[0])} rows)")


def steps(x):
    return [None] + list(np.diff(x))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="figure_data", help="output directory")
    args = ap.parse_args(argv)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    mathieu = catalog("mathieu", c=5.0)
    cfg = SolverConfig(orders=(6, 8, 10), tols=(1e-3, 1e-6, 1e-8), n0=251)
    for k in (0, 5):
        sol = solve(mathieu, k, cfg)
        write(out / f"mathieu_y{k}.csv", ["x", "y", "h", "abs_diff"],
              [sol.x, sol.y, steps(sol.x), companion_difference(sol)])

    sol = solve(catalog("laguerre"), 9)
    x = Transform.x_of_tau(sol.x)
    write(out / "laguerre_y9.csv", ["tau", "x", "y", "h_tau"], [sol.x, x, sol.y, steps(sol.x)])


if __name__ == "__main__":
    main()
