"""Adaptive driver: error estimation, equidistribution and the order cascade."""
import logging
import math
import os
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np

from .discretize import DIRICHLET_POLICY, POLICIES, Grid, assemble, retained_indices
from .eigen import (
    count_nodes,
    eig_compute,
    init_approx,
    normalize,
    select_by_zero_count,
)
from .exceptions import (
    GridTooCoarseError,
    HofidError,
    IndexOutOfRangeError,
    WrongBranchError,
)
from .stencil import interpolate

log = logging.getLogger(__name__)


def default_max_n():
    return int(os.environ.get("HOFID_MAX_N", 200_000))


RESIDUAL_GUARD = "residual"
COMPANION_GUARD = "companion"
GUARDS = (RESIDUAL_GUARD, COMPANION_GUARD)


@dataclass
class SolverConfig:
    orders: tuple = (4, 6, 8)
    tols: tuple = (1e-4, 1e-6, 1e-8)
    n0: Optional[int] = None
    max_n: int = field(default_factory=default_max_n)
    max_mesh_iters: int = 12
    ratio_cap: float = 2.0
    policy: str = DIRICHLET_POLICY
    safety: float = 0.8
    eig_tol: float = 1e-13
    # restarts of the bootstrap with doubled n0 after a wrong-branch failure
    max_restarts: int = 2
    guard: str = "companion"

    def __post_init__(self):
        self.orders = tuple(int(p) for p in self.orders)
        self.tols = tuple(float(t) for t in self.tols)
        if not self.orders or len(self.orders) != len(self.tols):
            raise ValueError("orders and tols must be non-empty and of equal length")
        if any(p % 2 or p < 2 for p in self.orders):
            raise ValueError("orders must be positive even integers")
        if any(b <= a for a, b in zip(self.orders, self.orders[1:])):
            raise ValueError("orders must be strictly increasing")
        if any(b >= a for a, b in zip(self.tols, self.tols[1:])):
            raise ValueError("tolerances must be strictly decreasing")
        if any(t <= 0 for t in self.tols):
            raise ValueError("tolerances must be positive")
        if self.ratio_cap < 1:
            raise ValueError("ratio cap must be >= 1")
        if self.guard not in GUARDS:
            raise ValueError(f"guard must be one of {GUARDS}")
        if self.policy not in POLICIES:
            raise ValueError(f"endpoint policy must be one of {POLICIES}")

    def initial_intervals(self, k):
        # an explicit n0 smaller than 5k cannot resolve k sign changes
        return max(self.n0 if self.n0 is not None else 20, 5 * k)


@dataclass
class IterationRecord:
    order: int
    iteration: int
    n: int
    lam: float
    err_norm: float
    E_r: float
    E_a: float


@dataclass
class StageRecord:
    order: int
    tol: float
    iterations: int
    n: int
    lam: float
    err_norm: float
    E_r: float
    E_a: float
    converged: bool
    zero_count: int


@dataclass
class Solution:
    problem: object
    k: int
    lam: float
    Y: np.ndarray
    grid: Grid
    rows: np.ndarray
    E_r: float
    E_a: float
    zero_count: int
    converged: bool
    history: list
    trace: list
    notes: list = field(default_factory=list)

    @property
    def n(self):
        return self.grid.n

    @property
    def x(self):
        return self.grid.points

    @property
    def y(self):
        """Eigenfunction on every grid point (zeros at eliminated ends)."""
        full = np.zeros(self.grid.n + 1)
        full[self.rows] = self.Y
        return full

    def to_dict(self):
        return {
            "problem": self.problem.to_dict(),
            "k": self.k,
            "lambda": float(f"{self.lam:.15e}"),
            "n": self.n,
            "E_r": float(f"{self.E_r:.6e}"),
            "E_a": float(f"{self.E_a:.6e}"),
            "zero_count": self.zero_count,
            "converged": self.converged,
            "history": [asdict(h) for h in self.history],
            "notes": list(self.notes),
        }


# entries of the indicator within this many ulps of the rounding scale are noise
NOISE_ULPS = 10.0


def _order_error(op_hi, lam, Y):
    e = op_hi.M.matvec(Y) - lam * Y
    scale = np.max(np.abs(Y))
    noise = NOISE_ULPS * np.finfo(float).eps * scale * (
        op_hi.M.abs_matvec(np.ones_like(Y)) + abs(lam))
    e[np.abs(e) <= noise] = 0.0
    return e / (1.0 + abs(lam))


def error_function(problem, grid, order, lam, Y, policy=DIRICHLET_POLICY):
    """Per-point error indicator: the order-(p+2) residual of the order-p pair.

    Entries indistinguishable from rounding in the stencil sums are set to 0.
    """
    op_hi = assemble(problem, grid, order + 2, policy)
    return _order_error(op_hi, lam, np.asarray(Y, dtype=float))


def _interval_errors(grid, e, rows):
    full = np.zeros(grid.n + 1)
    full[rows] = np.abs(e)
    return np.maximum(full[:-1], full[1:])


def _clamp_ratios(widths, cap):
    w = widths.copy()
    for i in range(1, len(w)):
        w[i] = min(w[i], cap * w[i - 1])
    for i in range(len(w) - 2, -1, -1):
        w[i] = min(w[i], cap * w[i + 1])
    return w


def equidistribute(grid, e, order, config=None, tol=None, current_error=None, rows=None):
    """New block-constant grid that equidistributes the error indicator ``e``.

    ``e`` lives on the retained points ``rows`` (default: interior points).
    When ``tol`` and ``current_error`` are given the interval count is scaled
    by ``(current_error / (safety * tol)) ** (1/p)``, never below the current
    count and at most doubled; otherwise the count is kept.
    """
    config = config or SolverConfig()
    p = order
    n = grid.n
    if rows is None:
        rows = np.arange(1, n) if len(e) == n - 1 else np.arange(len(e))
    e = np.asarray(e, dtype=float)
    if not np.any(e != 0):
        return grid

    h = grid.steps
    tau = _interval_errors(grid, e, rows)
    density = tau ** (1.0 / p) / h
    length = grid.b - grid.a
    mean_density = np.dot(density, h) / length
    density = np.maximum(density, 1e-2 * mean_density)

    N = n
    if tol is not None and current_error is not None and current_error > 0:
        # error ~ n^-p on an equidistributed mesh of fixed shape
        N = n * (current_error / (config.safety * tol)) ** (1.0 / p)
        N = min(max(N, n), 2 * n)
    N = min(N, config.max_n)
    nblocks = max(3, int(math.ceil(N / p)))
    if nblocks * p > config.max_n:
        nblocks = max(3, config.max_n // p)

    cum = np.concatenate([[0.0], np.cumsum(density * h)])
    targets = np.linspace(0.0, cum[-1], nblocks + 1)
    edges = np.interp(targets, cum, grid.points)
    widths = _clamp_ratios(np.diff(edges), config.ratio_cap)
    widths *= length / widths.sum()
    edges = grid.a + np.concatenate([[0.0], np.cumsum(widths)])
    edges[-1] = grid.b

    frac = np.arange(p) / p
    pts = (edges[:-1, None] + frac[None, :] * widths[:, None]).ravel()
    new = Grid(np.append(pts, grid.b), block_len=p)
    if not new.blocks_ok():
        raise RuntimeError("equidistribution produced a grid violating the block constraint")
    if new.max_block_ratio() > config.ratio_cap * (1 + 1e-9):
        raise RuntimeError("equidistribution produced a grid violating the ratio cap")
    return new


def transfer(problem, old_grid, old_rows, Y, new_grid, degree, policy=DIRICHLET_POLICY):
    """Interpolate an eigenvector from one grid to the retained points of another."""
    full = np.zeros(old_grid.n + 1)
    full[old_rows] = Y
    new_rows = retained_indices(problem, new_grid.n, policy)
    vals = interpolate(old_grid.points, full, new_grid.points, degree)
    return vals[new_rows]


def _refine(op, lam, Y, k, tol):
    try:
        inc, y = eig_compute(op, lam, Y, tol=tol, expected_k=k)
        return lam + inc, y
    except WrongBranchError as exc:
        log.info("wrong branch (%s); selecting by zero count", exc)
        lam2, y = select_by_zero_count(op, lam, k)
        inc, y = eig_compute(op, lam2, y, tol=tol, expected_k=k)
        return lam2 + inc, y


def _align(Y, ref, v):
    return -Y if np.dot(v, Y * ref) < 0 else Y


def _estimate(problem, grid, order, lam, Y, k, config, op):
    """Order p+2 companion solve on the same grid: local indicator and E_r, E_a."""
    op_hi = assemble(problem, grid, order + 2, config.policy)
    e = _order_error(op_hi, lam, Y)
    lam_hi, Y_hi = _refine(op_hi, lam, Y, k, config.eig_tol)
    Y_hi = _align(normalize(Y_hi, op_hi.v), Y, op.v)
    E_r = abs(lam - lam_hi) / abs(lam_hi) if lam_hi != 0 else abs(lam - lam_hi)
    E_a = float(np.max(np.abs(Y - Y_hi)))
    return e, E_r, E_a


def _ensure_fits(grid, order):
    # the companion order-(p+2) stencils need p + 4 points
    while grid.n + 1 < order + 4:
        grid = Grid(np.linspace(grid.a, grid.b, 2 * grid.n + 1))
    return grid


@dataclass
class StageResult:
    lam: float
    Y: np.ndarray
    grid: Grid
    rows: np.ndarray
    iterations: int
    converged: bool
    err_norm: float
    E_r: float
    E_a: float


def solve_fixed_order(problem, k, order, tol, lam, Y, grid, config=None, rows=None,
                      trace=None, on_iteration: Optional[Callable] = None):
    """Adapt the mesh at fixed order until the order-p vs p+2 error is below ``tol``.

    ``Y`` lives on ``rows`` of ``grid`` (default: the retained points).  With
    the default companion guard the loop stops once max(E_r, E_a), measured
    against the order-(p+2) solution on the same mesh, is below ``tol`` and the
    residual indicator only shapes the next mesh.  The residual guard stops on
    the indicator's max norm instead.
    """
    config = config or SolverConfig()
    policy = config.policy
    if rows is None:
        rows = retained_indices(problem, grid.n, policy)
    fitted = _ensure_fits(grid, order)
    if fitted is not grid:
        Y = transfer(problem, grid, rows, Y, fitted, order, policy)
        grid = fitted
        rows = retained_indices(problem, grid.n, policy)

    best = None
    converged = False
    it = 0
    for it in range(config.max_mesh_iters + 1):
        op = assemble(problem, grid, order, policy)
        lam, Yn = _refine(op, lam, Y, k, config.eig_tol)
        Y = _align(normalize(Yn, op.v), Y, op.v) if Y.shape == Yn.shape else normalize(Yn, op.v)
        e, E_r, E_a = _estimate(problem, grid, order, lam, Y, k, config, op)
        err = rec_err = float(np.max(np.abs(e)))
        if config.guard == COMPANION_GUARD:
            err = max(E_r, E_a)
        rec = IterationRecord(order, it, grid.n, lam, rec_err, E_r, E_a)
        if trace is not None:
            trace.append(rec)
        if on_iteration is not None:
            on_iteration(rec)
        log.debug("p=%d it=%d n=%d lam=%.15g |e|=%.2e E_r=%.2e E_a=%.2e",
                  order, it, grid.n, lam, rec.err_norm, E_r, E_a)
        result = StageResult(lam, Y, grid, op.rows, it, False, rec.err_norm, E_r, E_a)
        if best is None or err <= best_err:
            best_err = err
            best = result
        if err <= tol:
            converged = True
            best = result
            break
        if it == config.max_mesh_iters or grid.n >= config.max_n:
            break
        new_grid = equidistribute(grid, e, order, config, tol=tol, current_error=err,
                                  rows=op.rows)
        if new_grid is grid:
            break
        Y = transfer(problem, grid, op.rows, Y, new_grid, order, policy)
        grid = new_grid

    best.converged = converged
    best.iterations = it + 1
    if not converged:
        log.warning("order %d did not reach tol %.1e after %d meshes (error %.2e, n=%d)",
                    order, tol, it + 1, best_err, best.grid.n)
    return best


def solve(problem, k, config=None, on_iteration=None):
    """Compute eigenpair k: order-2 bootstrap followed by the order cascade."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    config = config or SolverConfig()
    n0 = config.initial_intervals(k)
    notes = []
    last_exc = None
    for attempt in range(config.max_restarts + 1):
        try:
            return _cascade(problem, k, config, n0, notes, on_iteration)
        except (WrongBranchError, IndexOutOfRangeError) as exc:
            last_exc = exc
            notes.append(f"restart {attempt + 1}: {exc}; n0 {n0} -> {2 * n0}")
            log.info("restarting bootstrap with n0=%d: %s", 2 * n0, exc)
            n0 *= 2
    raise last_exc


def _cascade(problem, k, config, n0, notes, on_iteration):
    pair, grid = init_approx(problem, k, n0, config.policy)
    while pair.fallback and n0 < 8 * config.initial_intervals(k):
        notes.append(f"bootstrap zero-count mismatch at n0={n0}")
        n0 *= 2
        pair, grid = init_approx(problem, k, n0, config.policy)
    if pair.fallback:
        notes.append("bootstrap fell back to the (k+1)-th smallest eigenvalue")
    lam, Y = pair.lam, pair.Y
    rows = retained_indices(problem, grid.n, config.policy)
    history, trace = [], []
    stage = None
    for order, tol in zip(config.orders, config.tols):
        try:
            stage = solve_fixed_order(problem, k, order, tol, lam, Y, grid, config,
                                      rows=rows, trace=trace, on_iteration=on_iteration)
        except HofidError as exc:
            exc.args = (f"order {order} stage: {exc}",) + exc.args[1:]
            raise
        history.append(StageRecord(order, tol, stage.iterations, stage.grid.n, stage.lam,
                                   stage.err_norm, stage.E_r, stage.E_a, stage.converged,
                                   count_nodes(stage.Y)))
        lam, Y, grid, rows = stage.lam, stage.Y, stage.grid, stage.rows

    return Solution(
        problem=problem, k=k, lam=stage.lam, Y=stage.Y, grid=stage.grid, rows=stage.rows,
        E_r=stage.E_r, E_a=stage.E_a, zero_count=count_nodes(stage.Y),
        converged=all(h.converged for h in history), history=history, trace=trace,
        notes=notes,
    )
