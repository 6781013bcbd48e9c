"""Assembly of the standardized banded eigenproblem M Y = lambda Y."""
from dataclasses import dataclass

import numpy as np

from .exceptions import CoefficientError, GridTooCoarseError
from .stencil import fornberg_batch, quadrature_weights, stencil_plans

DIRICHLET_POLICY = "dirichlet"
EQUATION_POLICY = "equation"
POLICIES = (DIRICHLET_POLICY, EQUATION_POLICY)


@dataclass(frozen=True, eq=False)
class Grid:
    """Strictly increasing mesh; ``block_len`` > 0 means the step is constant
    inside each run of ``block_len`` consecutive intervals."""

    points: np.ndarray
    block_len: int = 0

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1 or len(pts) < 2:
            raise ValueError("grid needs at least two points")
        if np.any(np.diff(pts) <= 0):
            raise ValueError("grid points must be strictly increasing")
        object.__setattr__(self, "points", pts)

    @classmethod
    def uniform(cls, a, b, n):
        return cls(np.linspace(a, b, n + 1))

    @property
    def n(self):
        return len(self.points) - 1

    @property
    def a(self):
        return self.points[0]

    @property
    def b(self):
        return self.points[-1]

    @property
    def steps(self):
        return np.diff(self.points)

    def blocks_ok(self, rtol=1e-8):
        if self.block_len <= 0:
            return True
        h = self.steps
        for start in range(0, len(h), self.block_len):
            blk = h[start:start + self.block_len]
            if blk.max() - blk.min() > rtol * blk.max():
                return False
        return True

    def max_block_ratio(self):
        if self.block_len <= 0:
            h = self.steps
            return float(np.max(np.maximum(h[1:] / h[:-1], h[:-1] / h[1:]))) if len(h) > 1 else 1.0
        hb = self.steps[::self.block_len]
        if len(hb) < 2:
            return 1.0
        return float(np.max(np.maximum(hb[1:] / hb[:-1], hb[:-1] / hb[1:])))


class BandedMatrix:
    """Square band matrix stored as ``ab[ku + i - j, j] = A[i, j]``."""

    def __init__(self, ab, kl, ku):
        self.ab = np.asarray(ab, dtype=float)
        self.kl = int(kl)
        self.ku = int(ku)
        if self.ab.shape[0] != self.kl + self.ku + 1:
            raise ValueError("band storage has the wrong number of rows")

    @property
    def m(self):
        return self.ab.shape[1]

    @classmethod
    def from_dense(cls, A, kl=None, ku=None):
        A = np.asarray(A, dtype=float)
        m = A.shape[0]
        nz = np.argwhere(A != 0)
        if kl is None:
            kl = int(max(0, (nz[:, 0] - nz[:, 1]).max())) if len(nz) else 0
        if ku is None:
            ku = int(max(0, (nz[:, 1] - nz[:, 0]).max())) if len(nz) else 0
        ab = np.zeros((kl + ku + 1, m))
        for d in range(-kl, ku + 1):
            diag = np.diagonal(A, d)
            if d >= 0:
                ab[ku - d, d:] = diag
            else:
                ab[ku - d, :m + d] = diag
        return cls(ab, kl, ku)

    def to_dense(self):
        m = self.m
        A = np.zeros((m, m))
        for d in range(-self.kl, self.ku + 1):
            if d >= 0:
                A += np.diag(self.ab[self.ku - d, d:], d)
            else:
                A += np.diag(self.ab[self.ku - d, :m + d], d)
        return A

    def to_sparse(self):
        from scipy.sparse import dia_matrix

        offsets = np.arange(self.ku, -self.kl - 1, -1)
        return dia_matrix((self.ab, offsets), shape=(self.m, self.m)).tocsc()

    def diagonal(self):
        return self.ab[self.ku].copy()

    def matvec(self, y):
        y = np.asarray(y, dtype=float)
        m = self.m
        out = np.zeros(m)
        for d in range(-self.kl, self.ku + 1):
            row = self.ab[self.ku - d]
            if d >= 0:
                out[:m - d] += row[d:] * y[d:]
            else:
                out[-d:] += row[:m + d] * y[:m + d]
        return out

    __matmul__ = matvec

    def abs_matvec(self, y):
        """|A| @ |y|, the scale of rounding errors in ``A @ y``."""
        return BandedMatrix(np.abs(self.ab), self.kl, self.ku).matvec(np.abs(y))

    def shifted(self, sigma):
        ab = self.ab.copy()
        ab[self.ku] -= sigma
        return BandedMatrix(ab, self.kl, self.ku)

    def norm_inf(self):
        return float(np.abs(self.ab).sum(axis=0).max()) if self.m else 0.0

    def to_matrix_market(self, path):
        from scipy.io import mmwrite

        mmwrite(str(path), self.to_sparse().tocoo(), comment="hofid banded operator")


@dataclass(frozen=True, eq=False)
class DiscreteOperator:
    M: BandedMatrix
    v: np.ndarray
    grid: Grid
    rows: np.ndarray
    order: int

    @property
    def m(self):
        return self.M.m

    def extend(self, Y):
        """Values on every grid point, zeros at eliminated Dirichlet ends."""
        full = np.zeros(self.grid.n + 1)
        full[self.rows] = Y
        return full


def retained_indices(problem, n, policy=DIRICHLET_POLICY):
    if policy not in POLICIES:
        raise ValueError(f"unknown endpoint policy {policy!r}")
    lo = 0 if (policy == EQUATION_POLICY and problem.left.singular) else 1
    hi = n if (policy == EQUATION_POLICY and problem.right.singular) else n - 1
    return np.arange(lo, hi + 1)


def _check_grid(problem, grid):
    alpha, beta = problem.working_interval
    scale = max(1.0, abs(alpha), abs(beta))
    if abs(grid.a - alpha) > 1e-12 * scale or abs(grid.b - beta) > 1e-12 * scale:
        raise ValueError(
            f"grid [{grid.a}, {grid.b}] does not span working interval [{alpha}, {beta}]")


def assemble(problem, grid, order, policy=DIRICHLET_POLICY):
    """Order-``order`` operator M with rows (p A2 + q A1 + r) / w on ``grid``."""
    _check_grid(problem, grid)
    x = grid.points
    n = grid.n
    rows = retained_indices(problem, n, policy)
    if len(rows) < 1:
        raise GridTooCoarseError("no unknowns left after boundary elimination")
    xr = x[rows]
    with np.errstate(all="ignore"):
        pc, qc, rc, wc = problem.coefficients.evaluate(xr)
    for label, vals in (("p", pc), ("q", qc), ("r", rc), ("w", wc)):
        bad = ~np.isfinite(vals)
        if bad.any():
            raise CoefficientError(f"{label}(x) not finite at x = {xr[bad][0]!r}")
    if np.any(wc <= 0):
        raise CoefficientError(f"w(x) <= 0 at x = {xr[wc <= 0][0]!r}")
    if np.any(pc == 0):
        raise CoefficientError(f"p(x) = 0 at x = {xr[pc == 0][0]!r}")

    s2, r2 = stencil_plans(order, 2, rows, n)
    use_q = bool(np.any(qc != 0))
    if use_q:
        s1, r1 = stencil_plans(order, 1, rows, n)
        kl_g, ku_g = int(max(s2.max(), s1.max())), int(max(r2.max(), r1.max()))
    else:
        kl_g, ku_g = int(s2.max()), int(r2.max())

    local = np.zeros((len(rows), kl_g + ku_g + 1))
    plans = [(2, s2, r2, pc)] + ([(1, s1, r1, qc)] if use_q else [])
    for nu, ss, rr, coef in plans:
        for s, r in set(zip(ss.tolist(), rr.tolist())):
            sel = np.nonzero((ss == s) & (rr == r))[0]
            span = np.arange(-s, r + 1)
            offsets = x[rows[sel, None] + span[None, :]] - xr[sel, None]
            W = fornberg_batch(offsets, nu, rows=rows[sel])[:, :, nu]
            local[sel[:, None], (kl_g + span)[None, :]] += coef[sel, None] * W
    local[:, kl_g] += rc
    local /= wc[:, None]

    # band layout in unknown numbering; columns of eliminated points are dropped
    m = len(rows)
    ab = np.zeros((kl_g + ku_g + 1, m))
    u = np.arange(m)
    for c in range(kl_g + ku_g + 1):
        j = u + c - kl_g
        ok = (j >= 0) & (j < m)
        ab[ku_g + kl_g - c, j[ok]] = local[ok, c]
    M = BandedMatrix(ab, kl_g, ku_g)
    v = quadrature_weights(x)[rows]
    return DiscreteOperator(M=M, v=v, grid=grid, rows=rows, order=order)


def residual(op, lam, Y):
    Y = np.asarray(Y, dtype=float)
    if Y.shape != (op.m,):
        raise ValueError(f"vector of length {Y.shape} does not match operator size {op.m}")
    return op.M.matvec(Y) - lam * Y
