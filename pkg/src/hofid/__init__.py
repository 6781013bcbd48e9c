"""High-order finite differences for Sturm-Liouville eigenproblems on adaptive grids."""
from .adapt import SolverConfig, Solution, solve, solve_fixed_order
from .discretize import BandedMatrix, Grid, assemble
from .eigen import count_sign_changes, eig_compute, init_approx
from .problem import SLProblem, catalog, transform_to_finite, truncate
from .stencil import fd_weights, stencil_plan

__version__ = "0.1.0"

__all__ = [
    "BandedMatrix", "Grid", "SLProblem", "Solution", "SolverConfig", "assemble", "catalog",
    "count_sign_changes", "eig_compute", "fd_weights", "init_approx", "solve",
    "solve_fixed_order", "stencil_plan", "transform_to_finite", "truncate",
]
