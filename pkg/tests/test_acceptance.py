"""Acceptance criteria 1-8, one test per criterion.

Each test prints a single PASS/FAIL line; the lines are repeated in the
terminal summary (see conftest.py).
"""
import functools
import math
import time

import numpy as np
from scipy.special import ai_zeros

import hofid.adapt as adapt
from hofid.adapt import SolverConfig, solve
from hofid.discretize import Grid, assemble
from hofid.eigen import count_sign_changes, eig_compute, init_approx
from hofid.problem import catalog
from hofid.reference import TABLES
from hofid.stencil import fd_weights, quadrature_weights

REPORT = []


def report(number, title, failures, detail=""):
    status = "FAIL" if failures else "PASS"
    line = f"criterion {number} {status}: {title}"
    if detail:
        line += f" [{detail}]"
    REPORT.append(line)
    print(line)
    assert not failures, "; ".join(failures)


def timed_solve(problem, k, config=None):
    t0 = time.perf_counter()
    sol = solve(problem, k, config)
    return sol, time.perf_counter() - t0


@functools.lru_cache(maxsize=None)
def table_runs(number):
    """Solve every row of a reference table; returns (row, solution, seconds)."""
    table = TABLES[number]
    params = dict(table.params)
    if table.delta is not None:
        params["delta"] = table.delta
    problem = catalog(table.problem, **params)
    out = []
    for row in table.rows:
        cfg = SolverConfig(orders=row.orders, tols=row.tols, n0=table.n0)
        sol, secs = timed_solve(problem, row.k, cfg)
        out.append((row, sol, secs))
    return out


def find(number, k, orders=None):
    for row, sol, secs in table_runs(number):
        if row.k == k and (orders is None or row.orders == orders):
            return row, sol, secs
    raise KeyError((number, k, orders))


def test_criterion_1_sine_oracle():
    failures, total = [], 0.0
    for k in (0, 1, 2, 4, 9):
        sol, secs = timed_solve(catalog("sine"), k)
        total += secs
        if abs(sol.lam - (k + 1) ** 2) > 1e-6:
            failures.append(f"k={k}: lambda {sol.lam!r}")
        if sol.zero_count != k:
            failures.append(f"k={k}: zero_count {sol.zero_count}")
    if total >= 5.0:
        failures.append(f"runtime {total:.1f}s")
    report(1, "sine eigenvalues within 1e-6, zero_count = k", failures, f"{total:.2f}s")


# The k=14 mode is used for every order.  The relative eigenvalue error is a
# function of w = (k+1) h only; the order-8 term dominates the order-10 one
# for w below about 0.12, while rounding sets in near 1e-13 relative.  The
# order-8 grids therefore start at w = 0.12 and refine by 1.2, which keeps all
# three levels inside that window.  Lower orders use coarser, wider steps.
ORDER_GRIDS = {2: (60, 120, 240), 4: (150, 300, 600), 6: (240, 360, 540), 8: (400, 480, 576)}
ORDER_MODE = 14


def uniform_eigen_error(p, n, k=ORDER_MODE):
    pr = catalog("sine")
    op = assemble(pr, Grid.uniform(0, math.pi, n), p)
    pair, _ = init_approx(pr, k, n)
    inc, _ = eig_compute(op, pair.lam, pair.Y, expected_k=k, tol=1e-15)
    exact = (k + 1) ** 2
    return abs(pair.lam + inc - exact) / exact


def test_criterion_2_uniform_order():
    t0 = time.perf_counter()
    failures, seen = [], []
    for p, ns in ORDER_GRIDS.items():
        errs = np.array([uniform_eigen_error(p, n) for n in ns])
        rates = np.log(errs[:-1] / errs[1:]) / np.log(np.diff(ns) / np.array(ns[:-1]) + 1)
        seen.append(f"p={p}: " + ",".join(f"{r:.2f}" for r in rates))
        if np.any(np.abs(rates - p) > 0.5):
            failures.append(f"p={p}: rates {rates}")
    secs = time.perf_counter() - t0
    if secs >= 10.0:
        failures.append(f"runtime {secs:.1f}s")
    report(2, "empirical order within 0.5 of p on uniform meshes", failures,
           "; ".join(seen) + f"; {secs:.2f}s")


def test_criterion_3_mathieu_table():
    failures, seen = [], []
    for k, orders, atol, ref_n in ((0, (6, 8, 10), 1e-8, 981),
                                     (6, (4, 6, 8), 1e-6, 695),
                                     (12, (4, 6, 8), 1e-6, 501)):
        row, sol, secs = find(1, k, orders)
        diff = abs(sol.lam - row.lam)
        seen.append(f"k={k}: |d|={diff:.1e} n={sol.n}/{ref_n} {secs:.1f}s")
        if diff > atol:
            failures.append(f"k={k}: lambda {sol.lam!r} off by {diff:.2e}")
        if not ref_n / 4 <= sol.n <= 4 * ref_n:
            failures.append(f"k={k}: n={sol.n} not within 4x of {ref_n}")
        if secs >= 60.0:
            failures.append(f"k={k}: runtime {secs:.1f}s")
    report(3, "Mathieu eigenvalues and mesh sizes", failures, "; ".join(seen))


def test_criterion_4_pruess_table():
    failures, seen = [], []
    for k, p, want in ((1, 4, 1.12481680), (4, 6, 15.8644571), (9, 8, 62.0987973)):
        _, sol, _ = find(2, k, (p,))
        rel = abs(sol.lam - want) / abs(want)
        seen.append(f"k={k},p={p}: {sol.lam:.8f} rel {rel:.1e}")
        if rel > 5e-7:
            failures.append(f"k={k}, p={p}: lambda {sol.lam:.10g} vs {want} (rel {rel:.2e})")
    n4 = find(2, 1, (4,))[1].n
    n8 = find(2, 1, (8,))[1].n
    seen.append(f"k=1 mesh sizes p=4: {n4}, p=8: {n8}")
    if n8 < n4:
        failures.append(f"order 8 mesh ({n8}) beats order 4 mesh ({n4}) for k=1")
    report(4, "Pruess fixed-order values and order reduction", failures, "; ".join(seen))


def test_criterion_5_airy_table():
    zeros = -ai_zeros(5)[0]
    failures, seen = [], []
    total = 0.0
    for row, sol, secs in table_runs(3):
        total += secs
        diff = abs(sol.lam - row.lam)
        atol = 5e-7 if row.k == 0 else 5e-6
        if diff > atol:
            failures.append(f"k={row.k} {row.orders}: lambda {sol.lam!r} off by {diff:.2e}")
        if abs(sol.lam - zeros[row.k]) > atol:
            failures.append(f"k={row.k} {row.orders}: {sol.lam!r} vs Airy zero {zeros[row.k]!r}")
        seen.append(f"k={row.k},{'-'.join(map(str, row.orders))}: {diff:.1e}")
    if total >= 120.0:
        failures.append(f"runtime {total:.1f}s")
    report(5, "Airy eigenvalues against the table and Airy zeros", failures,
           "; ".join(seen) + f"; {total:.2f}s")


def test_criterion_6_laguerre_table():
    failures, seen = [], []
    for k in (0, 4, 9, 24):
        _, sol, secs = find(4, k, (4, 6, 8))
        diff = abs(sol.lam - 4 * (k + 1))
        seen.append(f"k={k}: {diff:.1e}")
        if diff > 1e-5:
            failures.append(f"k={k}: lambda {sol.lam!r}")
        if k == 24 and secs >= 180.0:
            failures.append(f"k=24 runtime {secs:.1f}s")
    report(6, "Laguerre cascade within 1e-5 of 4(k+1)", failures, "; ".join(seen))


def test_criterion_7_invariant_suite(monkeypatch):
    t0 = time.perf_counter()
    failures = []

    # polynomial exactness of skewed stencils on scattered nodes
    rng = np.random.default_rng(7)
    for nu in (0, 1, 2):
        nodes = np.linspace(-1, 1, 9) + rng.uniform(-0.08, 0.08, 9)
        w = fd_weights(nodes, 0.13, nu)
        for deg in range(9):
            exact = (math.factorial(deg) / math.factorial(deg - nu) * 0.13 ** (deg - nu)
                     if deg >= nu else 0.0)
            if abs(np.dot(w, nodes**deg) - exact) > 1e-8 * max(1.0, abs(exact)):
                failures.append(f"stencil nu={nu} degree {deg}")

    # every remesh emitted during real solves
    grids = []
    original = adapt.equidistribute

    def recording(*args, **kwargs):
        g = original(*args, **kwargs)
        grids.append(g)
        return g

    monkeypatch.setattr(adapt, "equidistribute", recording)
    sols = [solve(catalog("pruess"), 3), solve(catalog("airy"), 2), solve(catalog("sine"), 2)]
    monkeypatch.undo()
    if not grids:
        failures.append("no remesh recorded")
    for g in grids:
        if not g.blocks_ok() or g.max_block_ratio() > 2.0 * (1 + 1e-9):
            failures.append(f"invalid mesh n={g.n}")

    for sol in sols:
        v = quadrature_weights(sol.x)
        if abs(np.dot(v, sol.y**2) - 1) > 1e-12:
            failures.append(f"normalization {np.dot(v, sol.y**2)!r}")

    # inverse power residual bound
    op = assemble(catalog("mathieu"), Grid.uniform(0, 40, 300), 6)
    inc, y = eig_compute(op, -3.4, np.ones(op.m), tol=1e-13)
    r = op.M.matvec(y) - (-3.4 + inc) * y
    if np.linalg.norm(r) > 100 * 1e-13 * op.M.norm_inf() * np.linalg.norm(y):
        failures.append("inverse power residual")

    for values, want in (([1, 2, 3], 0), ([1, -1, 1], 2), ([0.0, -2, 0, 0, 3], 1)):
        if count_sign_changes(values) != want:
            failures.append(f"sign changes of {values}")

    secs = time.perf_counter() - t0
    if secs >= 5.0:
        failures.append(f"runtime {secs:.1f}s")
    report(7, "invariant suite", failures, f"{len(grids)} remeshes checked; {secs:.2f}s")


def test_criterion_8_error_reporting():
    failures, checked = [], 0
    for number in (1, 2, 3, 4):
        for row, sol, _ in table_runs(number):
            if not sol.converged:
                continue
            checked += 1
            if sol.E_r > row.tols[-1]:
                failures.append(f"table {number} k={row.k} {row.orders}: E_r {sol.E_r:.2e}")
    _, sol, _ = find(1, 0, (6, 8, 10))
    if not sol.E_a <= 1e-7:
        failures.append(f"Mathieu k=0 E_a {sol.E_a:.2e}")
    report(8, "E_r within final tolerance, Mathieu k=0 E_a <= 1e-7", failures,
           f"{checked} converged runs; E_a(k=0)={sol.E_a:.2e}")


def test_pruess_ground_state_matches_first_row():
    # the k=1 rows of the Pruess table print the ground state eigenvalue
    for p in (4, 6, 8):
        sol = solve(catalog("pruess"), 0, SolverConfig(orders=(p,), tols=(1e-8,), n0=21))
        assert abs(sol.lam - 1.12481680) <= 5e-7 * 1.12481680
