"""Discrete inverse conductivity on hypercubic lattices."""

from ._calderon import (
    FormatError,
    Lattice,
    assemble_dtn,
    kernel_dimension,
    parse_problem,
    problem_json,
    random_conductivity,
    reconstruct,
    run_property_suite,
    solve_dirichlet,
)

__all__ = [
    "FormatError",
    "Lattice",
    "assemble_dtn",
    "kernel_dimension",
    "parse_problem",
    "problem_json",
    "random_conductivity",
    "reconstruct",
    "run_property_suite",
    "solve_dirichlet",
]
