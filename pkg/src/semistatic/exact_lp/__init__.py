"""Exact rational linear programming."""
from .backend import BACKENDS, default_backend, get_backend
from .model import INFEASIBLE, OPTIMAL, UNBOUNDED, LPSolution, RationalLP, verify_certificate
from .simplex import add_observer, remove_observer, solve

__all__ = [
    "BACKENDS", "INFEASIBLE", "OPTIMAL", "UNBOUNDED", "LPSolution", "RationalLP",
    "add_observer", "default_backend", "remove_observer", "get_backend", "solve", "verify_certificate",
]
