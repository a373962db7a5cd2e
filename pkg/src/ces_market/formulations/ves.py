"""Capacity-leasing model: per-building best responses to a linear lease
price and the operator's equilibrium found by a price sweep."""

from __future__ import annotations

import numpy as np

from ..instance import Instance
from ..milp import SolveParams, solve_with_backend
from .builders import build_bc_lease_program, extract_schedule
from .market import SolverLimitError
from .outcomes import (
    OperationSchedule,
    VesBcResult,
    VesOutcome,
    VesPricePoint,
    expected_bills,
)

__all__ = ["default_price_grid", "solve_ves_bc", "ves_equilibrium"]

DEFAULT_PRICE_START = 0.05
DEFAULT_PRICE_STOP = 0.5
DEFAULT_PRICE_STEP = 0.002


def default_price_grid(
    start: float = DEFAULT_PRICE_START,
    stop: float = DEFAULT_PRICE_STOP,
    step: float = DEFAULT_PRICE_STEP,
) -> np.ndarray:
    """Inclusive arithmetic price grid; the default spans 0.05..0.5 in steps
    of 0.002 (226 points)."""
    if step <= 0:
        raise ValueError(f"step must be > 0, got {step}")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(max(count, 1))


def solve_ves_bc(
    inst: Instance,
    i: int,
    lease_price: float,
    params: SolveParams | None = None,
    *,
    backend: str = "reference",
) -> VesBcResult:
    """Building `i`'s cost-minimizing rented capacity and dispatch at one
    lease price."""
    model, index = build_bc_lease_program(inst, i, lease_price)
    solution = solve_with_backend(model, params or SolveParams(), backend=backend)
    if solution.x is None:
        raise SolverLimitError(f"lease solve for building {i} hit a limit")
    x = solution.x
    schedule = extract_schedule(x, index.cells)
    capacity = float(x[index.lease_cap])
    single = OperationSchedule(
        **{k: getattr(schedule, k) for k in (
            "p_ch", "p_dis", "e", "p_gplus", "p_gminus",
            "x_ch", "x_dis", "x_gplus", "x_gminus")}
    )
    return VesBcResult(
        capacity=capacity,
        total_cost=float(solution.objective),
        bill=float(solution.objective) - lease_price * capacity,
        schedule=single,
        solution=solution,
    )


def ves_equilibrium(
    inst: Instance,
    price_grid: np.ndarray | None = None,
    params: SolveParams | None = None,
    *,
    backend: str = "reference",
    energy_sizing: str = "contracted",
) -> VesOutcome:
    """Sweep lease prices, solving every building independently per price.

    Operator profit at a price is lease revenue minus the capital cost of
    backing it: the energy capacity equals the sum of contracted capacities
    (``energy_sizing="peak_soc"`` instead uses the peak aggregate stored
    energy, for sensitivity analysis) and the power capacity is the peak
    aggregate net charging/discharging power of the buildings' independent
    schedules. The equilibrium is the grid point of maximal profit, lowest
    price on ties.
    """
    if energy_sizing not in ("contracted", "peak_soc"):
        raise ValueError(f"unknown energy_sizing {energy_sizing!r}")
    prices = default_price_grid() if price_grid is None else np.asarray(price_grid, dtype=float)
    if prices.size == 0:
        raise ValueError("price grid must be non-empty")
    if prices.size > 1 and not (np.diff(prices) > 0).all():
        raise ValueError("price grid must be strictly ascending")

    n = inst.n_buildings
    points: list[VesPricePoint] = []
    best_idx = 0
    best_schedule: OperationSchedule | None = None
    for k, price in enumerate(prices):
        results = [
            solve_ves_bc(inst, i, float(price), params, backend=backend)
            for i in range(n)
        ]
        schedule = OperationSchedule.stack([r.schedule for r in results])
        capacities = np.array([r.capacity for r in results])
        if energy_sizing == "contracted":
            e_capacity = float(capacities.sum())
        else:
            e_capacity = float(schedule.aggregate_soc().max(initial=0.0))
        p_capacity = float(np.abs(schedule.aggregate_net_power()).max(initial=0.0))
        revenue = float(price) * float(capacities.sum())
        capital = inst.tech.c_e * e_capacity + inst.tech.c_p * p_capacity
        bills = expected_bills(schedule, inst)
        point = VesPricePoint(
            price=float(price),
            capacities=capacities,
            bc_costs=np.array([r.total_cost for r in results]),
            bills=bills,
            e_capacity=e_capacity,
            p_capacity=p_capacity,
            eso_profit=revenue - capital,
        )
        points.append(point)
        if best_schedule is None or point.eso_profit > points[best_idx].eso_profit:
            best_idx = k
            best_schedule = schedule
    return VesOutcome(
        prices=prices,
        points=points,
        equilibrium_index=best_idx,
        schedule=best_schedule,
    )
