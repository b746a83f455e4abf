"""Exact statevector simulation of the filtering-based linear-system algorithm."""
from .pipeline import prepare_solution_state, qlsa_solve

__all__ = ["qlsa_solve", "prepare_solution_state"]
