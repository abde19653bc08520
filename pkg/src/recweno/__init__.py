"""Finite-volume WENO schemes for the compressible Euler equations.

Sixth-order recursive WENO reconstruction (linear, JS and Z weights) with a
fifth-order companion, HLLC/LLF fluxes, TVD Runge-Kutta time stepping and a
suite of 1D/2D benchmark problems.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .euler import GasModel, NonPhysicalState, cons_to_prim, prim_to_cons
from .problems import (
    PROBLEMS,
    ErrorReport,
    ProblemSpec,
    Snapshot,
    convergence_study,
    error_norms,
    exact_advect_sine,
    get_problem,
    init_problem,
    reference_solution,
    solve,
)
from .reconstruction import JS, LINEAR, Z, WeightScheme, reconstruct5, reconstruct6
from .riemann import exact_riemann
from .solver import BoundarySpec, ConservedField, Discretization, Grid, TimeControls, advance

__all__ = [
    "__version__",
    "GasModel",
    "NonPhysicalState",
    "cons_to_prim",
    "prim_to_cons",
    "PROBLEMS",
    "ErrorReport",
    "ProblemSpec",
    "Snapshot",
    "convergence_study",
    "error_norms",
    "exact_advect_sine",
    "get_problem",
    "init_problem",
    "reference_solution",
    "solve",
    "JS",
    "LINEAR",
    "Z",
    "WeightScheme",
    "reconstruct5",
    "reconstruct6",
    "exact_riemann",
    "BoundarySpec",
    "ConservedField",
    "Discretization",
    "Grid",
    "TimeControls",
    "advance",
]
