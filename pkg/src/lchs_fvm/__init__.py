"""Quantum simulation of advection-diffusion equations with finite volumes and LCHS select circuits."""
from . import analysis, blocks, circuits, fvm, lchs, reference, sim, solver
from .fvm import Periodic, PdeProblem, Robin, dirichlet, neumann
from .lchs import make_outer_plan, make_plan
from .solver import SolveReport, solve_homogeneous, solve_inhomogeneous

__version__ = "0.1.0"

__all__ = [
    "analysis", "blocks", "circuits", "fvm", "lchs", "reference", "sim", "solver",
    "Periodic", "PdeProblem", "Robin", "dirichlet", "neumann",
    "make_outer_plan", "make_plan", "SolveReport", "solve_homogeneous", "solve_inhomogeneous",
]
