"""Published reference eigenvalues and the run configurations behind them.

Each table lists rows of (k, orders, tols, lambda, n).  ``lam`` is the value as
printed (so at most 8-16 significant digits); ``n`` is the reported mesh size.
"""
from dataclasses import dataclass
from typing import Optional


@dataclass(frozen=True)
class ReferenceRow:
    k: int
    orders: tuple
    tols: tuple
    lam: float
    n: Optional[int]
    # absolute tolerance used when flagging the computed value
    atol: float
    E_r: Optional[float] = None
    E_a: Optional[float] = None


@dataclass(frozen=True)
class ReferenceTable:
    number: int
    problem: str
    params: dict
    n0: int
    title: str
    rows: tuple
    # problem parameters such as the truncation offset
    delta: Optional[float] = None


_HI = ((6, 8, 10), (1e-3, 1e-6, 1e-8))
_LO = ((4, 6, 8), (1e-2, 1e-4, 1e-6))
_CASCADE = ((4, 6, 8), (1e-4, 1e-6, 1e-8))


def _fixed(p):
    return (p,), (1e-8,)


TABLES = {
    1: ReferenceTable(
        1, "mathieu", {"c": 5.0}, 251, "Mathieu equation, c = 5",
        (
            ReferenceRow(0, *_HI, -3.484238869351126, 981, 1e-8, 1.08e-14, 3.06e-09),
            ReferenceRow(1, *_HI, -3.484221911373827, 1642, 1e-8, 3.29e-14, 7.46e-09),
            ReferenceRow(2, *_HI, -3.484197999007796, 986, 1e-8, 1.15e-14, 4.12e-09),
            ReferenceRow(3, *_HI, -3.484172609556845, 1315, 1e-8, 1.33e-14, 6.25e-09),
            ReferenceRow(4, *_HI, -3.484151559702016, 1416, 1e-8, 1.22e-13, 9.90e-09),
            ReferenceRow(5, *_HI, -3.484139672740876, 1158, 1e-8, 9.55e-14, 9.08e-09),
            ReferenceRow(6, *_LO, -5.995435510621165e-01, 695, 1e-6, 9.94e-10, 1.05e-07),
            ReferenceRow(12, *_LO, 1.932914885763969, 501, 1e-6, 1.97e-09, 1.67e-09),
        ),
    ),
    2: ReferenceTable(
        2, "pruess", {}, 21, "Pruess equation, fixed orders",
        (
            ReferenceRow(1, *_fixed(4), 1.12481680, 290, 5e-7 * 1.12481680, 3.36e-09, 2.64e-09),
            ReferenceRow(1, *_fixed(6), 1.12481680, 435, 5e-7 * 1.12481680, 1.44e-09, 1.74e-09),
            ReferenceRow(1, *_fixed(8), 1.12481678, 321, 5e-7 * 1.12481680, 4.13e-09, 5.18e-09),
            ReferenceRow(4, *_fixed(4), 15.8644571, 1201, 5e-7 * 15.8644571, 1.13e-09, 1.39e-09),
            ReferenceRow(4, *_fixed(6), 15.8644571, 363, 5e-7 * 15.8644571, 1.47e-09, 7.65e-09),
            ReferenceRow(4, *_fixed(8), 15.8644571, 395, 5e-7 * 15.8644571, 9.41e-10, 5.38e-09),
            ReferenceRow(9, *_fixed(4), 62.0987975, 1930, 5e-7 * 62.0987973, 3.22e-10, 6.74e-09),
            ReferenceRow(9, *_fixed(6), 62.0987973, 503, 5e-7 * 62.0987973, 8.99e-10, 3.91e-09),
            ReferenceRow(9, *_fixed(8), 62.0987972, 429, 5e-7 * 62.0987973, 7.68e-10, 8.85e-09),
        ),
    ),
    3: ReferenceTable(
        3, "airy", {}, 21, "Airy equation on the mapped interval", (
            ReferenceRow(0, *_fixed(4), 2.33810740, 872, 5e-7, 1.00e-09, 4.98e-09),
            ReferenceRow(0, *_fixed(6), 2.33810741, 789, 5e-7, 1.36e-09, 8.51e-09),
            ReferenceRow(0, *_fixed(8), 2.33810741, 912, 5e-7, 1.60e-09, 1.00e-08),
            ReferenceRow(0, *_CASCADE, 2.33810741, 938, 5e-7, 1.19e-09, 7.44e-09),
            ReferenceRow(4, *_fixed(4), 7.94413358, 3648, 5e-6, 2.00e-11, 4.54e-09),
            ReferenceRow(4, *_fixed(6), 7.94413358, 3657, 5e-6, 5.28e-11, 1.79e-09),
            ReferenceRow(4, *_fixed(8), 7.94413358, 5169, 5e-6, 4.33e-11, 1.47e-09),
            ReferenceRow(4, *_CASCADE, 7.94413358, 5337, 5e-6, 7.94e-11, 5.99e-11),
        ),
        delta=1e-4,
    ),
    4: ReferenceTable(
        4, "laguerre", {}, 21, "Laguerre equation on the mapped interval", (
            ReferenceRow(0, *_fixed(4), 3.99999999, 1018, 1e-5, 3.65e-10, 8.71e-09),
            ReferenceRow(0, *_fixed(6), 4.00000000, 969, 1e-5, 1.19e-11, 8.63e-09),
            ReferenceRow(0, *_fixed(8), 3.99999999, 748, 1e-5, 3.03e-11, 9.04e-09),
            ReferenceRow(0, *_CASCADE, 3.99999999, 569, 1e-5, 2.22e-11, 6.77e-09),
            ReferenceRow(4, *_CASCADE, 20.00000000, 597, 1e-5, 1.33e-11, 9.04e-09),
            ReferenceRow(9, *_CASCADE, 39.99999999, 753, 1e-5, 2.95e-11, 9.37e-09),
            ReferenceRow(24, *_CASCADE, 99.99999999, 2067, 1e-5, 8.52e-12, 1.09e-09),
        ),
        delta=1e-4,
    ),
}

# first zeros of Ai(-z), for cross-checking the Airy rows
AIRY_ZEROS = (2.338107410459767, 4.087949444130971, 5.520559828095551,
              6.786708090071759, 7.944133587120853)
