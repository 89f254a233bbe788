"""Monge-Ampere eigenvalue solver on unstructured P1 meshes."""

from .eigensolver import (EXACT, INEXACT, SolverConfig, SolverReport,
                          solve_eigenproblem, solve_on_mesh)
from .geometry import DomainSpec, domain_from_token
from .mesh import TriMesh, generate_mesh

__all__ = [
    "DomainSpec",
    "EXACT",
    "INEXACT",
    "SolverConfig",
    "SolverReport",
    "TriMesh",
    "domain_from_token",
    "generate_mesh",
    "solve_eigenproblem",
    "solve_on_mesh",
]

__version__ = "0.1.0"
