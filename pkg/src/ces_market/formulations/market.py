"""Shared-storage market solves: the operator's profit-maximizing
equilibrium program, the community-optimum benchmark, and the no-storage
baseline."""

from __future__ import annotations

import numpy as np

from ..game import equilibrium_price
from ..instance import Instance
from ..milp import MilpModel, SolveParams, SolveStatus, solve_with_backend
from .builders import build_market_program, extract_schedule
from .outcomes import (
    CMES,
    WO_ES,
    CesOutcome,
    ModelOutcome,
    OperationSchedule,
    expected_bills,
)

__all__ = [
    "SolverLimitError",
    "build_ces_program",
    "solve_ces",
    "solve_cmes",
    "solve_baseline",
]

R_EPS = 1e-6  # requests below this are economically zero


class SolverLimitError(RuntimeError):
    """A node/time limit was hit before any incumbent existed."""


def build_ces_program(inst: Instance, j_ind: np.ndarray) -> MilpModel:
    """The operator's blended equilibrium program (participation and
    accept/reject constraints included); `j_ind` holds each building's
    optimal standalone total cost."""
    model, _ = build_market_program(inst, j_ind, incentive=True)
    return model


def _run(model, params: SolveParams | None, backend: str):
    params = params or SolveParams()
    solution = solve_with_backend(model, params, backend=backend)
    if solution.status is SolveStatus.INFEASIBLE:
        raise RuntimeError("market program infeasible; this indicates a formulation bug")
    if solution.status is SolveStatus.UNBOUNDED:
        raise RuntimeError("market program unbounded; this indicates a formulation bug")
    if solution.x is None:
        raise SolverLimitError("solver limit reached with no incumbent")
    return solution, params


def solve_ces(
    inst: Instance,
    params: SolveParams | None = None,
    j_ind: np.ndarray | None = None,
    *,
    backend: str = "reference",
    relax_exclusivity: bool = False,
) -> CesOutcome:
    """Solve the operator market and extract the equilibrium.

    Per-building prices follow from the served requests; a building whose
    accepted request is numerically zero is reported as rejected (a zero
    request at zero payment is economically identical). When `j_ind` is
    omitted the standalone sizing solves run first.
    """
    if j_ind is None:
        from .ies import solve_ies_total

        j_ind = np.array(
            [solve_ies_total(inst, i, params, backend=backend).j_ind
             for i in range(inst.n_buildings)]
        )
    j_ind = np.asarray(j_ind, dtype=float)
    model, index = build_market_program(
        inst, j_ind, incentive=True, relax_exclusivity=relax_exclusivity
    )
    solution, params = _run(model, params, backend)

    x = solution.x
    n = inst.n_buildings
    r_star = x[index.r].astype(float)
    s = np.round(x[index.s]).astype(int)
    accepted = (s > 0) & (r_star > R_EPS)
    r_star = np.where(accepted, r_star, 0.0)
    schedule = extract_schedule(x, index.cells)
    e_capacity = float(x[index.e_cap])
    p_capacity = float(x[index.p_cap])

    q_star = np.full(n, np.nan)
    payments = np.zeros(n)
    for i in np.nonzero(accepted)[0]:
        q_star[i] = equilibrium_price(float(r_star[i]), inst.tariff)
        payments[i] = q_star[i] * r_star[i] ** 2

    # A rejected building is out of the market and falls back to its best
    # standalone plan, so its cost entry is j_ind (equal to the baseline
    # bill whenever standalone storage would not pay off).
    market_bills = expected_bills(schedule, inst)
    bills = np.where(accepted, market_bills, j_ind)
    capital = inst.tech.c_e * e_capacity + inst.tech.c_p * p_capacity
    eso_profit = float(payments.sum() - capital)

    return CesOutcome(
        r_star=r_star,
        q_star=q_star,
        accepted=accepted,
        payments=payments,
        bills=bills,
        e_capacity=e_capacity,
        p_capacity=p_capacity,
        eso_profit=eso_profit,
        schedule=schedule,
        j_ind=j_ind,
        solution=solution,
        certified=solution.status is SolveStatus.OPTIMAL,
    )


def solve_cmes(
    inst: Instance,
    params: SolveParams | None = None,
    *,
    backend: str = "reference",
    relax_exclusivity: bool = False,
) -> ModelOutcome:
    """Community optimum: every building is served and the total of bills
    plus capital is minimized over the same physical constraints."""
    model, index = build_market_program(
        inst, None, incentive=False, relax_exclusivity=relax_exclusivity
    )
    solution, params = _run(model, params, backend)
    x = solution.x
    schedule = extract_schedule(x, index.cells)
    e_capacity = float(x[index.e_cap])
    p_capacity = float(x[index.p_cap])
    bills = expected_bills(schedule, inst)
    capital = inst.tech.c_e * e_capacity + inst.tech.c_p * p_capacity
    social = float(bills.sum() + capital)
    return ModelOutcome(
        model=CMES,
        per_bc_cost=bills.copy(),
        social_cost=social,
        bills=bills,
        r=x[index.r].astype(float),
        e_capacity=e_capacity,
        p_capacity=p_capacity,
        eso_profit=None,
        schedule=schedule,
        solution=solution,
        certified=solution.status is SolveStatus.OPTIMAL,
    )


def solve_baseline(inst: Instance) -> ModelOutcome:
    """No-storage reference: every building pays its baseline bill."""
    bills = inst.baseline_bills.copy()
    n, omega, periods = inst.n_buildings, inst.n_scenarios, inst.time.T
    return ModelOutcome(
        model=WO_ES,
        per_bc_cost=bills.copy(),
        social_cost=float(bills.sum()),
        bills=bills,
        e_capacity=0.0,
        p_capacity=0.0,
        schedule=OperationSchedule.zeros(n, omega, periods),
    )
