"""Individual-storage solves: the per-building sizing benchmark, the
capital-cost-versus-request curve, and its quadratic fit."""

from __future__ import annotations

import math

import numpy as np

from ..instance import Instance
from ..milp import SolveParams, SolveStatus, solve_with_backend
from .builders import build_bc_sizing_program, extract_schedule
from .market import SolverLimitError
from .outcomes import IES, IesBcResult, IesResult, ModelOutcome, QuadraticFit

__all__ = [
    "solve_ies_min_capital",
    "solve_ies_total",
    "sweep_ies_curve",
    "fit_quadratic",
    "solve_ies",
    "ies_outcome",
]


def solve_ies_min_capital(
    inst: Instance,
    i: int,
    r: float,
    params: SolveParams | None = None,
    *,
    backend: str = "reference",
) -> float:
    """Minimum capital cost for building `i` to get `r` kWh of its surplus
    shifted into its own demand. Requests beyond what the efficiencies allow
    are infeasible and reported as ``inf``."""
    if not 0 <= r <= inst.r_max[i] + 1e-9:
        raise ValueError(f"request {r} outside [0, {inst.r_max[i]}]")
    if r == 0:
        return 0.0
    model, _ = build_bc_sizing_program(inst, i, rus_target=r, include_bill=False)
    solution = solve_with_backend(model, params or SolveParams(), backend=backend)
    if solution.status is SolveStatus.INFEASIBLE:
        return math.inf
    if solution.x is None:
        raise SolverLimitError(f"sizing solve for building {i} hit a limit")
    return float(solution.objective)


def solve_ies_total(
    inst: Instance,
    i: int,
    params: SolveParams | None = None,
    *,
    backend: str = "reference",
) -> IesBcResult:
    """Building `i`'s best standalone plan: one joint sizing + operation
    solve of bill plus capital. The realized shift is read off the bill
    reduction divided by the price spread."""
    model, index = build_bc_sizing_program(inst, i, rus_target=None, include_bill=True)
    solution = solve_with_backend(model, params or SolveParams(), backend=backend)
    if solution.x is None:
        raise SolverLimitError(f"standalone solve for building {i} hit a limit")
    x = solution.x
    schedule = extract_schedule(x, index.cells)
    e_hat = float(x[index.e_cap])
    p_hat = float(x[index.p_cap])
    capital = inst.tech.c_e * e_hat + inst.tech.c_p * p_hat
    bill = float(solution.objective) - capital
    r_hat = (float(inst.baseline_bills[i]) - bill) / inst.tariff.spread
    return IesBcResult(
        building=inst.buildings[i].name,
        j_ind=float(solution.objective),
        r_hat=max(0.0, r_hat),
        e_hat=e_hat,
        p_hat=p_hat,
        bill=bill,
        schedule=schedule,
        solution=solution,
    )


def sweep_ies_curve(
    inst: Instance,
    i: int,
    step: float = 10.0,
    params: SolveParams | None = None,
    *,
    backend: str = "reference",
) -> list[tuple[float, float]]:
    """Sample the capital-cost curve at requests 0, step, 2*step, ... up to
    and including the surplus bound. Infeasible requests carry ``inf``."""
    if step <= 0:
        raise ValueError(f"step must be > 0, got {step}")
    r_max = float(inst.r_max[i])
    grid = [k * step for k in range(int(math.floor(r_max / step + 1e-9)) + 1)]
    if not grid or r_max - grid[-1] > 1e-9:
        grid.append(r_max)
    return [
        (r, solve_ies_min_capital(inst, i, r, params, backend=backend)) for r in grid
    ]


def fit_quadratic(curve: list[tuple[float, float]]) -> QuadraticFit:
    """Least-squares quadratic through the origin on the feasible samples:
    ``q_hat = sum(Q r^2) / sum(r^4)``; also reports the fit's R**2."""
    pts = [(r, q) for r, q in curve if math.isfinite(q)]
    if len(pts) < 2:
        raise ValueError("need at least two finite curve points")
    r = np.array([p[0] for p in pts])
    q = np.array([p[1] for p in pts])
    denom = float((r**4).sum())
    if denom == 0:
        raise ValueError("degenerate curve: all requests are zero")
    q_hat = float((q * r**2).sum() / denom)
    resid = q - q_hat * r**2
    total = q - q.mean()
    ss_tot = float((total**2).sum())
    r2 = 1.0 - float((resid**2).sum()) / ss_tot if ss_tot > 0 else 1.0
    return QuadraticFit(q_hat=q_hat, r_squared=r2)


def solve_ies(
    inst: Instance,
    params: SolveParams | None = None,
    *,
    curves: bool = False,
    curve_step: float = 10.0,
    backend: str = "reference",
) -> IesResult:
    """Standalone solves for every building; optionally also sweeps each
    capital-cost curve and fits its quadratic price coefficient."""
    per_bc = []
    for i in range(inst.n_buildings):
        entry = solve_ies_total(inst, i, params, backend=backend)
        if curves:
            entry.curve = sweep_ies_curve(inst, i, curve_step, params, backend=backend)
            try:
                fit = fit_quadratic(entry.curve)
                entry.q_hat = fit.q_hat
                entry.fit_r2 = fit.r_squared
            except ValueError:
                entry.q_hat = None
        per_bc.append(entry)
    return IesResult(per_bc=per_bc)


def ies_outcome(result: IesResult, inst: Instance) -> ModelOutcome:
    """Wrap per-building standalone results into the uniform envelope."""
    costs = result.j_ind
    bills = np.array([r.bill for r in result.per_bc])
    return ModelOutcome(
        model=IES,
        per_bc_cost=costs,
        social_cost=float(costs.sum()),
        bills=bills,
        r=np.array([r.r_hat for r in result.per_bc]),
        e_capacity=float(sum(r.e_hat for r in result.per_bc)),
        p_capacity=float(sum(r.p_hat for r in result.per_bc)),
        schedule=None,
    )
