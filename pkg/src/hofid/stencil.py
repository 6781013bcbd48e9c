"""Finite-difference weights on arbitrary nodes, stencil layout and quadrature.

Weights come from Fornberg's recursion, evaluated in coordinates scaled by
the local spacing and vectorised over many stencils at once so that a whole
matrix can be assembled without a Python loop per row.
"""
from dataclasses import dataclass

import numpy as np

from .exceptions import GridTooCoarseError, IllConditionedStencilError

#: adjacent-spacing ratio above which a stencil is rejected
MAX_SPACING_RATIO = 16.0

SUPPORTED_ORDERS = (2, 4, 6, 8, 10, 12, 14)


@dataclass(frozen=True)
class Stencil:
    nu: int
    s: int
    r: int
    weights: np.ndarray

    def __post_init__(self):
        if len(self.weights) != self.s + self.r + 1:
            raise ValueError("stencil needs s + r + 1 weights")


def _check_spacing(offsets, rows=None):
    gaps = np.diff(offsets, axis=-1)
    if np.any(gaps <= 0):
        bad = int(np.argwhere(np.any(gaps <= 0, axis=-1))[0][0])
        where = bad if rows is None else int(rows[bad])
        raise IllConditionedStencilError(
            f"stencil nodes not strictly increasing at point {where}", point=where)
    if gaps.shape[-1] < 2:
        return
    ratio = gaps.max(axis=-1) / gaps.min(axis=-1)
    if np.any(ratio > MAX_SPACING_RATIO):
        bad = int(np.argmax(ratio))
        where = bad if rows is None else int(rows[bad])
        raise IllConditionedStencilError(
            f"spacing ratio {ratio[bad]:.3g} exceeds {MAX_SPACING_RATIO} at point {where}",
            point=where)


def fornberg_batch(offsets, m, rows=None):
    """Weights for derivatives 0..m of many stencils at once.

    ``offsets`` has shape (R, N): node positions relative to each evaluation
    point. Returns an array of shape (R, N, m + 1) whose ``[..., nu]`` slice
    holds the nu-th derivative weights.  ``rows`` only labels error messages.
    """
    offsets = np.atleast_2d(np.asarray(offsets, dtype=float))
    R, N = offsets.shape
    if N < m + 1:
        raise GridTooCoarseError(f"{N} nodes cannot resolve derivative {m}")
    _check_spacing(offsets, rows)

    scale = (offsets[:, -1] - offsets[:, 0]) / (N - 1) if N > 1 else np.ones(R)
    z = offsets / scale[:, None]

    C = np.zeros((R, N, m + 1))
    C[:, 0, 0] = 1.0
    c1 = np.ones(R)
    c4 = z[:, 0].copy()
    for i in range(1, N):
        mn = min(i, m)
        c2 = np.ones(R)
        c5 = c4
        c4 = z[:, i].copy()
        for j in range(i):
            c3 = z[:, i] - z[:, j]
            c2 = c2 * c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    C[:, i, k] = c1 * (k * C[:, i - 1, k - 1] - c5 * C[:, i - 1, k]) / c2
                C[:, i, 0] = -c1 * c5 * C[:, i - 1, 0] / c2
            for k in range(mn, 0, -1):
                C[:, j, k] = (c4 * C[:, j, k] - k * C[:, j, k - 1]) / c3
            C[:, j, 0] = c4 * C[:, j, 0] / c3
        c1 = c2

    powers = scale[:, None] ** np.arange(m + 1)[None, :]
    return C / powers[:, None, :]


def fd_weights(nodes, x_eval, nu):
    """Maximal-order weights w with y^(nu)(x_eval) ~ sum_j w_j y(nodes[j]).

    >>> fd_weights([-1.0, 0.0, 1.0], 0.0, 2)
    array([ 1., -2.,  1.])
    """
    nodes = np.asarray(nodes, dtype=float)
    if nodes.ndim != 1 or len(nodes) < nu + 1:
        raise GridTooCoarseError(f"need at least {nu + 1} nodes for derivative {nu}")
    return fornberg_batch(nodes[None, :] - x_eval, nu)[0, :, nu]


def stencil_plan(p, nu, i, n):
    """Left/right reach (s, r) of the order-p stencil for derivative nu at grid index i.

    ``n`` is the index of the last grid point.  Interior rows are symmetric
    with s = r = p/2; rows near an end are shifted and widened to
    s + r = p + nu - 1 so the one-sided formula still has order p.
    """
    if p % 2 or p < 2:
        raise ValueError(f"order must be a positive even integer, got {p}")
    if not 0 <= i <= n:
        raise IndexError(f"row {i} outside grid 0..{n}")
    if n + 1 < p + nu:
        raise GridTooCoarseError(
            f"grid with {n + 1} points cannot host order-{p} stencils for derivative {nu}")
    half = p // 2
    if i >= half and n - i >= half:
        return half, half
    width = p + nu - 1
    if i < half:
        return i, width - i
    r = n - i
    return width - r, r


def stencil_plans(p, nu, rows, n):
    """Vectorised :func:`stencil_plan` for an array of row indices."""
    rows = np.asarray(rows)
    if n + 1 < p + nu:
        raise GridTooCoarseError(
            f"grid with {n + 1} points cannot host order-{p} stencils for derivative {nu}")
    half = p // 2
    width = p + nu - 1
    s = np.full(rows.shape, half)
    r = np.full(rows.shape, half)
    left = rows < half
    right = (n - rows < half) & ~left
    s[left] = rows[left]
    r[left] = width - rows[left]
    r[right] = n - rows[right]
    s[right] = width - r[right]
    return s, r


def make_stencil(points, i, p, nu):
    points = np.asarray(points, dtype=float)
    s, r = stencil_plan(p, nu, i, len(points) - 1)
    w = fd_weights(points[i - s:i + r + 1], points[i], nu)
    return Stencil(nu=nu, s=s, r=r, weights=w)


def quadrature_weights(points):
    """Composite trapezoidal weights on a (possibly nonuniform) grid."""
    x = np.asarray(points, dtype=float)
    if len(x) < 2:
        raise ValueError("quadrature needs at least two points")
    h = np.diff(x)
    v = np.zeros_like(x)
    v[:-1] += h / 2
    v[1:] += h / 2
    return v


def interpolate(x_old, y_old, x_new, degree):
    """Local polynomial interpolation of degree ``degree`` from nearest nodes."""
    x_old = np.asarray(x_old, dtype=float)
    y_old = np.asarray(y_old, dtype=float)
    x_new = np.asarray(x_new, dtype=float)
    npts = min(degree + 1, len(x_old))
    idx = np.searchsorted(x_old, x_new)
    start = np.clip(idx - npts // 2, 0, len(x_old) - npts)
    cols = start[:, None] + np.arange(npts)[None, :]
    w = fornberg_batch(x_old[cols] - x_new[:, None], 0)[:, :, 0]
    out = np.einsum("ij,ij->i", w, y_old[cols])
    exact = np.isin(x_new, x_old)
    if exact.any():
        out[exact] = y_old[np.searchsorted(x_old, x_new[exact])]
    return out
