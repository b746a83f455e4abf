"""Meshfree Poisson solver with Wendland kernels and a desk-scale QLSA simulator."""
from .assembly import assemble_collocation, assemble_evaluation, assemble_rhs, normalize_for_encoding
from .geometry import Domain, PointSet, make_point_set
from .kernel import make_wendland, radial_bilaplacian, radial_laplacian
from .solver import conjugate_gradient, manufactured_solution, solve_system

__version__ = "0.1.0"

__all__ = [
    "Domain",
    "PointSet",
    "make_point_set",
    "make_wendland",
    "radial_laplacian",
    "radial_bilaplacian",
    "assemble_collocation",
    "assemble_rhs",
    "assemble_evaluation",
    "normalize_for_encoding",
    "conjugate_gradient",
    "solve_system",
    "manufactured_solution",
]
