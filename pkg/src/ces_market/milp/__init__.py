"""Generic MILP layer: model container, bounded simplex, branch-and-bound,
and backend dispatch."""

from .backends import (
    BackendUnavailableError,
    available_backends,
    solve,
    solve_with_backend,
)
from .model import (
    BINARY,
    CONTINUOUS,
    MilpModel,
    MilpSolution,
    ModelError,
    SolveParams,
    SolveStatus,
    check_solution,
    new_model,
)
from .simplex import LpResult, SimplexFailure, solve_lp

__all__ = [
    "BINARY",
    "CONTINUOUS",
    "BackendUnavailableError",
    "LpResult",
    "MilpModel",
    "MilpSolution",
    "ModelError",
    "SimplexFailure",
    "SolveParams",
    "SolveStatus",
    "available_backends",
    "check_solution",
    "new_model",
    "solve",
    "solve_lp",
    "solve_with_backend",
]
