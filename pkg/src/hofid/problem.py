"""Sturm-Liouville problem definitions and the built-in catalog.

A problem is  p(x) y'' + q(x) y' + r(x) y = lambda w(x) y  on a working
interval.  Coefficient callbacks take and return numpy arrays.
"""
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .exceptions import ProblemDefinitionError

DIRICHLET = "dirichlet"
LCNO = "lcno"
LP = "lp"
ENDPOINT_KINDS = (DIRICHLET, LCNO, LP)


@dataclass(frozen=True)
class Endpoint:
    kind: str = DIRICHLET
    delta: float = 0.0

    def __post_init__(self):
        if self.kind not in ENDPOINT_KINDS:
            raise ProblemDefinitionError(f"unknown endpoint kind {self.kind!r}")
        if self.delta < 0:
            raise ProblemDefinitionError("truncation offset must be nonnegative")

    @property
    def singular(self):
        return self.kind != DIRICHLET


def _const(c):
    return lambda x: np.full(np.shape(x), float(c))


@dataclass(frozen=True)
class Coefficients:
    p: Callable
    q: Callable
    r: Callable
    w: Callable
    # human-readable forms, used only for logging/serialisation
    exprs: dict = field(default_factory=dict)

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        return tuple(np.broadcast_to(np.asarray(f(x), dtype=float), x.shape)
                     for f in (self.p, self.q, self.r, self.w))


@dataclass(frozen=True)
class Transform:
    """Change of variable tau = 1 - 1/sqrt(1 + x) mapping [0, inf) onto [0, 1)."""

    name: str = "tau = 1 - 1/sqrt(1+x)"

    @staticmethod
    def tau_of_x(x):
        return 1.0 - 1.0 / np.sqrt(1.0 + np.asarray(x, dtype=float))

    @staticmethod
    def x_of_tau(t):
        t = np.asarray(t, dtype=float)
        return (2.0 * t - t * t) / (1.0 - t) ** 2


@dataclass(frozen=True)
class SLProblem:
    name: str
    interval: tuple
    coefficients: Coefficients
    left: Endpoint = Endpoint()
    right: Endpoint = Endpoint()
    params: dict = field(default_factory=dict)
    transform: Optional[Transform] = None
    # interval of the problem before any change of variable
    original_interval: Optional[tuple] = None

    def __post_init__(self):
        a, b = self.interval
        if not a < b:
            raise ProblemDefinitionError(f"interval needs a < b, got [{a}, {b}]")

    @property
    def working_interval(self):
        a, b = self.interval
        alpha = a + self.left.delta
        beta = b - self.right.delta
        if not (math.isfinite(alpha) and math.isfinite(beta)):
            raise ProblemDefinitionError(
                f"{self.name}: infinite endpoint, apply transform_to_finite first")
        return alpha, beta

    def to_dict(self):
        def num(v):
            return v if math.isfinite(v) else ("inf" if v > 0 else "-inf")

        out = {
            "name": self.name,
            "params": dict(self.params),
            "interval": [num(v) for v in self.interval],
            "working_interval": list(self.working_interval),
            "left": {"kind": self.left.kind, "delta": self.left.delta},
            "right": {"kind": self.right.kind, "delta": self.right.delta},
            "coefficients": dict(self.coefficients.exprs),
        }
        if self.transform is not None:
            out["transform"] = self.transform.name
            out["original_interval"] = [num(v) for v in self.original_interval]
        return out


def _is_liouville(coeffs, xs):
    p, q, _, _ = coeffs.evaluate(xs)
    return np.allclose(p, -1.0, rtol=0, atol=1e-14) and np.allclose(q, 0.0, rtol=0, atol=1e-14)


def transform_to_finite(problem):
    """Map a Liouville-form problem on [0, inf) to [0, 1]; the right end becomes LP."""
    a, b = problem.interval
    if a != 0 or not (math.isinf(b) and b > 0):
        raise ProblemDefinitionError("transform_to_finite needs the interval [0, inf)")
    if not _is_liouville(problem.coefficients, np.array([0.5, 1.0, 3.0, 10.0])):
        raise ProblemDefinitionError("transform_to_finite needs p = -1 and q = 0")

    old = problem.coefficients
    x_of_tau = Transform.x_of_tau

    def p(t):
        return -((1.0 - t) ** 6) / 4.0

    def q(t):
        return 0.75 * (1.0 - t) ** 5

    def r(t):
        return old.r(x_of_tau(t))

    def w(t):
        return old.w(x_of_tau(t))

    exprs = {
        "p": "-(1-t)^6/4",
        "q": "3/4 (1-t)^5",
        "r": f"({old.exprs.get('r', 'r')}) at x = (2t-t^2)/(1-t)^2",
        "w": f"({old.exprs.get('w', 'w')}) at x = (2t-t^2)/(1-t)^2",
    }
    return replace(
        problem,
        interval=(0.0, 1.0),
        coefficients=Coefficients(p, q, r, w, exprs),
        right=Endpoint(LP, problem.right.delta),
        transform=Transform(),
        original_interval=problem.interval,
    )


def truncate(problem, delta_left=0.0, delta_right=0.0):
    """Shrink the working interval to [a + delta_left, b - delta_right]."""
    if delta_left < 0 or delta_right < 0:
        raise ProblemDefinitionError("truncation offsets must be nonnegative")
    a, b = problem.interval
    if a + delta_left >= b - delta_right:
        raise ProblemDefinitionError(
            f"truncation leaves an empty interval [{a + delta_left}, {b - delta_right}]")
    return replace(
        problem,
        left=replace(problem.left, delta=delta_left),
        right=replace(problem.right, delta=delta_right),
    )


def _liouville(name, interval, r, r_expr, left, right, params=None):
    coeffs = Coefficients(_const(-1.0), _const(0.0), r, _const(1.0),
                          {"p": "-1", "q": "0", "r": r_expr, "w": "1"})
    return SLProblem(name, interval, coeffs, left, right, dict(params or {}))


def mathieu(c=5.0):
    return _liouville("mathieu", (0.0, 40.0), lambda x: c * np.cos(x), f"{c:g} cos(x)",
                      Endpoint(), Endpoint(), {"c": c})


def pruess():
    return _liouville("pruess", (0.0, 4.0), np.log, "ln(x)", Endpoint(), Endpoint())


def airy(delta=1e-4):
    base = _liouville("airy", (0.0, math.inf), lambda x: np.asarray(x, dtype=float), "x",
                      Endpoint(), Endpoint(LP))
    return truncate(transform_to_finite(base), 0.0, delta)


def laguerre(delta=1e-4):
    def r(x):
        x = np.asarray(x, dtype=float)
        return x * x + 0.75 / (x * x)

    base = _liouville("laguerre", (0.0, math.inf), r, "x^2 + 3/(4 x^2)",
                      Endpoint(LP), Endpoint(LP))
    return truncate(transform_to_finite(base), delta, delta)


def sine():
    return _liouville("sine", (0.0, math.pi), _const(0.0), "0", Endpoint(), Endpoint())


CATALOG = {
    "mathieu": mathieu,
    "pruess": pruess,
    "airy": airy,
    "laguerre": laguerre,
    "sine": sine,
}


def catalog(name, **params):
    """Build a catalog problem by name, e.g. ``catalog("mathieu", c=5)``."""
    try:
        factory = CATALOG[name]
    except KeyError:
        raise ProblemDefinitionError(
            f"unknown problem {name!r}; choose from {sorted(CATALOG)}") from None
    try:
        return factory(**params)
    except TypeError as exc:
        raise ProblemDefinitionError(f"bad parameters for {name}: {exc}") from None


def exact_eigenvalue(problem, k):
    """Closed-form eigenvalue for catalog problems that have one, else None."""
    if problem.name == "sine":
        return float((k + 1) ** 2)
    if problem.name == "laguerre":
        return 4.0 * (k + 1)
    return None
