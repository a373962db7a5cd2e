"""Solver entry points and backend registry.

`solve` runs the built-in reference branch-and-bound. `solve_with_backend`
dispatches by name so large instances can be delegated to an external
solver ("highs", via scipy) while the reference backend stays the default
and the result contract stays identical.
"""

from __future__ import annotations

import numpy as np

from .branch_bound import solve_reference
from .model import MilpModel, MilpSolution, SolveParams, SolveStatus, check_solution

__all__ = [
    "BackendUnavailableError",
    "available_backends",
    "solve",
    "solve_with_backend",
]

DEFAULT_BACKEND = "reference"


class BackendUnavailableError(RuntimeError):
    """Requested backend is unknown or its dependency is missing."""


def solve(model: MilpModel, params: SolveParams | None = None) -> MilpSolution:
    """Solve with the reference backend; optimal results are re-checked by
    the independent feasibility checker before being returned."""
    params = params or SolveParams()
    solution = solve_reference(model, params)
    _assert_feasible(model, solution, params)
    return solution


def solve_with_backend(
    model: MilpModel,
    params: SolveParams | None = None,
    backend: str = DEFAULT_BACKEND,
) -> MilpSolution:
    params = params or SolveParams()
    try:
        runner = _REGISTRY[backend]
    except KeyError:
        raise BackendUnavailableError(
            f"unknown backend {backend!r}; available: {', '.join(sorted(_REGISTRY))}"
        ) from None
    solution = runner(model, params)
    _assert_feasible(model, solution, params)
    return solution


def available_backends() -> list[str]:
    return sorted(_REGISTRY)


def _assert_feasible(model: MilpModel, solution: MilpSolution, params: SolveParams) -> None:
    if solution.status is not SolveStatus.OPTIMAL:
        return
    problems = check_solution(model, solution.x, params.feas_tol * 10, params.int_tol * 10)
    if problems:
        raise ArithmeticError(
            "solver returned an optimal solution that fails the independent "
            "feasibility re-check: " + "; ".join(problems[:5])
        )


def _solve_highs(model: MilpModel, params: SolveParams) -> MilpSolution:
    try:
        from scipy.optimize import Bounds, LinearConstraint, milp
    except ImportError as exc:  # pragma: no cover
        raise BackendUnavailableError("scipy.optimize.milp is unavailable") from exc

    arr = model.arrays()
    sign = -1.0 if model.sense == "max" else 1.0
    rel = arr.relations
    lo = np.where(rel == 0, -np.inf, arr.rhs)
    hi = np.where(rel == 2, np.inf, arr.rhs)
    constraints = (
        [LinearConstraint(arr.a, lo, hi)] if model.n_constraints else []
    )
    res = milp(
        c=sign * arr.c,
        constraints=constraints,
        integrality=arr.binary.astype(int),
        bounds=Bounds(arr.lb, arr.ub),
        options={
            "mip_rel_gap": params.rel_gap,
            "time_limit": params.time_limit,
            "node_limit": params.node_limit,
        },
    )
    if res.status == 0:
        status = SolveStatus.OPTIMAL
    elif res.status == 2:
        status = SolveStatus.INFEASIBLE
    elif res.status == 3:
        status = SolveStatus.UNBOUNDED
    else:
        status = SolveStatus.LIMIT
    x = np.asarray(res.x, dtype=float) if res.x is not None else None
    objective = sign * res.fun if res.fun is not None else None
    return MilpSolution(
        status=status,
        objective=objective,
        x=x,
        gap=getattr(res, "mip_gap", None),
        bound=sign * res.mip_dual_bound if getattr(res, "mip_dual_bound", None) is not None else None,
        node_count=int(getattr(res, "mip_node_count", 0) or 0),
        iterations=0,
    )


_REGISTRY = {
    "reference": lambda model, params: solve_reference(model, params),
    "highs": _solve_highs,
}
