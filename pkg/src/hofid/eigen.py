"""Eigenvalue machinery: banded LU, shifted inverse iteration, bootstrap."""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg.lapack import dgbtrf, dgbtrs

from .discretize import DIRICHLET_POLICY, BandedMatrix, DiscreteOperator, Grid, assemble
from .exceptions import (
    DegenerateVectorError,
    IndexOutOfRangeError,
    NonConvergenceError,
    SingularShiftError,
    WrongBranchError,
)

log = logging.getLogger(__name__)

SINGULAR_PIVOT_RTOL = 1e-14
RQ_NOISE_ULPS = 100.0
# branch identification ignores lobes below this fraction of max|Y|; coarse
# high-order meshes leave parasitic wiggles in rapidly decaying tails
NODE_RTOL = 1e-3


@dataclass
class EigenPair:
    lam: float
    Y: np.ndarray
    zero_count: int
    # True when no eigenvector had exactly k sign changes
    fallback: bool = False


def count_sign_changes(Y, threshold=None):
    """Sign alternations between consecutive entries above ``threshold``.

    >>> count_sign_changes([1.0, 1e-15, -1.0], threshold=1e-12)
    1
    """
    Y = np.asarray(Y, dtype=float)
    if threshold is None:
        threshold = 1e-8 * (np.max(np.abs(Y)) if Y.size else 0.0)
    big = Y[np.abs(Y) > threshold]
    if big.size == 0:
        raise DegenerateVectorError("all entries are below the sign-change threshold")
    s = np.sign(big)
    return int(np.count_nonzero(s[1:] != s[:-1]))


def count_nodes(Y):
    """Sign changes between significant lobes, used to identify the branch."""
    Y = np.asarray(Y, dtype=float)
    return count_sign_changes(Y, NODE_RTOL * np.max(np.abs(Y)))


def normalize(Y, v, threshold=1e-8):
    """Scale so that sum(v * Y**2) = 1 and the first significant entry is positive."""
    Y = np.asarray(Y, dtype=float)
    mass = float(np.dot(v, Y * Y))
    if not mass > 0:
        raise DegenerateVectorError("cannot normalize a zero vector")
    Y = Y / np.sqrt(mass)
    big = np.nonzero(np.abs(Y) > threshold * np.max(np.abs(Y)))[0]
    if Y[big[0]] < 0:
        Y = -Y
    return Y


class BandedLU:
    """LAPACK gbtrf factorization with room for partial-pivoting fill."""

    def __init__(self, A):
        kl, ku, m = A.kl, A.ku, A.m
        work = np.zeros((2 * kl + ku + 1, m))
        work[kl:] = A.ab
        lu, piv, info = dgbtrf(work, kl, ku)
        if info < 0:
            raise ValueError(f"dgbtrf: illegal argument {-info}")
        if info > 0:
            raise SingularShiftError(f"exact zero pivot in column {info - 1}")
        diag = np.abs(lu[kl + ku])
        col_scale = np.abs(A.ab).max(axis=0)
        small = diag < SINGULAR_PIVOT_RTOL * np.maximum(col_scale, np.finfo(float).tiny)
        if small.any():
            raise SingularShiftError(
                f"pivot {diag[small][0]:.3e} numerically zero in column {int(np.argmax(small))}")
        self.lu, self.piv, self.kl, self.ku = lu, piv, kl, ku

    def solve(self, rhs):
        rhs = np.asarray(rhs, dtype=float)
        x, info = dgbtrs(self.lu, self.kl, self.ku, rhs.reshape(len(rhs), -1), self.piv)
        if info != 0:
            raise ValueError(f"dgbtrs failed with info={info}")
        return x.reshape(rhs.shape)


def banded_lu(A):
    return BandedLU(A)


def _matrix(op):
    return op.M if isinstance(op, DiscreteOperator) else op


def eig_compute(op, shift, Y0, tol=1e-13, maxit=50, expected_k=None):
    """Refine the eigenpair nearest ``shift`` by shifted inverse iteration.

    The shift is moved to the Rayleigh quotient after each solve.  Returns
    ``(increment, Y)``; the eigenvalue is ``shift + increment`` and Y has unit
    2-norm.  With ``expected_k`` set, a result with a different number of sign
    changes raises :class:`WrongBranchError`.
    """
    M = _matrix(op)
    y = np.asarray(Y0, dtype=float)
    nrm = np.linalg.norm(y)
    if not nrm > 0:
        raise DegenerateVectorError("starting vector is zero")
    y = y / nrm
    sigma = float(shift)
    est_prev = None
    est = sigma
    last_step = math.inf
    stalls = 0
    for _ in range(maxit):
        try:
            fac = BandedLU(M.shifted(sigma))
        except SingularShiftError:
            sigma += 1e-10 * (1.0 + abs(sigma))
            fac = BandedLU(M.shifted(sigma))
        z = fac.solve(y)
        if not np.all(np.isfinite(z)):
            sigma += 1e-10 * (1.0 + abs(sigma))
            continue
        z /= np.linalg.norm(z)
        if np.dot(z, y) < 0:
            z = -z
        y = z
        mu = float(np.dot(y, M.matvec(y)) - sigma)
        est = sigma + mu
        # rounding in the Rayleigh quotient; huge coefficients near singular
        # ends can put this above the requested tolerance
        floor = RQ_NOISE_ULPS * np.finfo(float).eps * float(np.dot(np.abs(y), M.abs_matvec(y)))
        thresh = max(tol * (1.0 + abs(est)), floor)
        step = abs(est - est_prev) if est_prev is not None else math.inf
        if abs(mu) <= thresh or step <= thresh:
            break
        stalls = stalls + 1 if step >= 0.5 * last_step else 0
        if stalls >= 3:
            log.debug("inverse iteration stalled at %.3e change", step)
            break
        last_step = step
        est_prev = est
        sigma = est
    else:
        raise NonConvergenceError(
            f"inverse iteration did not converge in {maxit} steps", lam=est, vector=y)

    if expected_k is not None:
        zc = count_nodes(y)
        if zc != expected_k:
            raise WrongBranchError(
                f"eigenvector near {est:.12g} has {zc} sign changes, expected {expected_k}",
                lam=est, vector=y, zero_count=zc)
    return est - float(shift), y


def select_by_zero_count(op, lam, k, nev=10, window=0.25):
    """Among eigenpairs nearest ``lam`` pick the one with exactly k sign changes.

    Candidates farther than ``window * (1 + |lam|)`` from ``lam`` are ignored.
    """
    M = _matrix(op)
    m = M.m
    if m <= 400:
        vals, vecs = np.linalg.eig(M.to_dense())
    else:
        from scipy.sparse.linalg import eigs

        vals, vecs = eigs(M.to_sparse(), k=min(nev, m - 2), sigma=lam, which="LM")
    order = np.argsort(np.abs(vals - lam))
    for idx in order:
        val = vals[idx]
        if abs(val.real - lam) > window * (1 + abs(lam)):
            break
        if abs(val.imag) > 1e-8 * (1 + abs(val.real)):
            continue
        y = np.real(vecs[:, idx])
        if count_nodes(y) == k:
            return float(val.real), y / np.linalg.norm(y)
    raise WrongBranchError(f"no eigenvector with {k} sign changes near {lam:.8g}", lam=lam)


def init_approx(problem, k, n0, policy=DIRICHLET_POLICY):
    """Order-2 full-spectrum bootstrap on a uniform grid of ``n0`` intervals.

    Returns ``(EigenPair, Grid)``.  The k-th eigenvalue is identified by the
    number of sign changes of its eigenvector.
    """
    alpha, beta = problem.working_interval
    grid = Grid.uniform(alpha, beta, n0)
    op = assemble(problem, grid, 2, policy)
    if k >= op.m:
        raise IndexOutOfRangeError(
            f"k={k} exceeds the {op.m} eigenvalues of an {n0}-interval grid; increase n0")
    vals, vecs = np.linalg.eig(op.M.to_dense())
    real = np.abs(vals.imag) <= 1e-8 * (1.0 + np.abs(vals.real))
    if not real.any():
        raise NonConvergenceError("bootstrap found no real eigenvalues")
    idx = np.nonzero(real)[0]
    idx = idx[np.argsort(vals.real[idx])]
    if k >= len(idx):
        raise IndexOutOfRangeError(
            f"only {len(idx)} real eigenvalues on an {n0}-interval grid; increase n0")

    counts = [count_nodes(np.real(vecs[:, j])) for j in idx]
    if counts[k] == k:
        choice, fallback = idx[k], False
    else:
        matches = [j for j, c in zip(idx, counts) if c == k]
        if matches:
            choice, fallback = matches[0], False
        else:
            choice, fallback = idx[k], True
            log.warning("no bootstrap eigenvector with %d sign changes; using the %d-th "
                        "smallest eigenvalue", k, k + 1)
    Y = normalize(np.real(vecs[:, choice]), op.v)
    pair = EigenPair(float(vals[choice].real), Y, count_nodes(Y), fallback)
    return pair, grid
