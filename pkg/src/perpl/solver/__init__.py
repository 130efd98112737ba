"""Least solutions of monotone polynomial equation systems over [0, ∞]."""
from .extreal import INF, star
from .kernels import BACKEND_NAME
from .newton import MonotonicityError, NewtonResult, newton_solve
from .poly import PolySystem, kleene, matrix_star, solve_linear
from .solve import SCCReport, Solution, SolverReport, solve
from .system import MSPE

__all__ = [
    "INF", "star", "BACKEND_NAME", "MonotonicityError", "NewtonResult", "newton_solve",
    "PolySystem", "kleene", "matrix_star", "solve_linear", "SCCReport", "Solution",
    "SolverReport", "solve", "MSPE",
]
