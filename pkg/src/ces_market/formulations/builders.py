"""MILP assembly for the market formulations.

One joint program covers the shared-storage models (operator market and
community optimum); per-building programs cover individual sizing and
capacity leasing. Variable layout is deterministic: per (building,
scenario, period) cell five continuous flows then four binaries, then the
per-building market variables, then the sizing variables.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..instance import Instance
from ..milp import BINARY, MilpModel
from .outcomes import OperationSchedule, profile_arrays

__all__ = [
    "MarketIndex",
    "BcIndex",
    "MissingIesInputError",
    "build_market_program",
    "build_bc_sizing_program",
    "build_bc_lease_program",
    "extract_schedule",
]

CELL_FIELDS = ("p_ch", "p_dis", "e", "p_gplus", "p_gminus",
               "x_ch", "x_dis", "x_gplus", "x_gminus")


class MissingIesInputError(ValueError):
    """The market program needs each building's standalone-storage cost;
    run the individual sizing solves first."""


@dataclass
class MarketIndex:
    """Variable ids of the joint program; cell arrays are (N, omega, T)."""

    cells: dict[str, np.ndarray]
    r: np.ndarray
    s: np.ndarray
    e_cap: int
    p_cap: int
    relaxed: bool


@dataclass
class BcIndex:
    """Variable ids of a single-building program; cell arrays are (omega, T)."""

    cells: dict[str, np.ndarray]
    e_cap: int | None = None  # sizing program
    p_cap: int | None = None
    lease_cap: int | None = None  # lease program
    relaxed: bool = False


def _add_cell_variables(
    model: MilpModel,
    omega: int,
    periods: int,
    renewable: np.ndarray,
    tag: str,
    relaxed: bool,
    p_ch_cap: float | None,
    p_dis_cap: float | None,
) -> dict[str, np.ndarray]:
    """Create the per-(scenario, period) operation variables of one building.

    Charging is bounded by the renewable output in the same period (storage
    may only absorb local generation). In relaxed mode the four binaries are
    omitted and the rate caps become plain bounds.
    """
    ids = {name: np.empty((omega, periods), dtype=np.int64) for name in CELL_FIELDS}
    inf = np.inf
    for w in range(omega):
        for t in range(periods):
            cell = f"{tag}{w},{t}]"
            ch_ub = renewable[w, t]
            if relaxed and p_ch_cap is not None:
                ch_ub = min(ch_ub, p_ch_cap)
            ids["p_ch"][w, t] = model.add_variable(0, ch_ub, name=f"pch[{cell}")
            dis_ub = p_dis_cap if (relaxed and p_dis_cap is not None) else inf
            ids["p_dis"][w, t] = model.add_variable(0, dis_ub, name=f"pdis[{cell}")
            ids["e"][w, t] = model.add_variable(0, inf, name=f"e[{cell}")
            ids["p_gplus"][w, t] = model.add_variable(0, inf, name=f"gbuy[{cell}")
            ids["p_gminus"][w, t] = model.add_variable(0, inf, name=f"gsell[{cell}")
            if relaxed:
                for name in ("x_ch", "x_dis", "x_gplus", "x_gminus"):
                    ids[name][w, t] = -1
            else:
                ids["x_ch"][w, t] = model.add_variable(0, 1, kind=BINARY, name=f"xch[{cell}")
                ids["x_dis"][w, t] = model.add_variable(0, 1, kind=BINARY, name=f"xdis[{cell}")
                ids["x_gplus"][w, t] = model.add_variable(0, 1, kind=BINARY, name=f"xbuy[{cell}")
                ids["x_gminus"][w, t] = model.add_variable(0, 1, kind=BINARY, name=f"xsell[{cell}")
    return ids


def _add_storage_rows(
    model: MilpModel,
    inst: Instance,
    ids: dict[str, np.ndarray],
    *,
    ch_cap: float | None,
    dis_cap: float | None,
    relaxed: bool,
) -> None:
    """Rate coupling, charge/discharge exclusivity, and the state-of-charge
    recursion (initial level zero, no terminal condition)."""
    omega, periods = ids["e"].shape
    dt = inst.time.dt_hours
    eta_ch, eta_dis = inst.tech.eta_ch, inst.tech.eta_dis
    for w in range(omega):
        for t in range(periods):
            if not relaxed:
                if ch_cap is not None:
                    model.add_constraint(
                        {ids["p_ch"][w, t]: 1.0, ids["x_ch"][w, t]: -ch_cap}, "<=", 0.0
                    )
                if dis_cap is not None:
                    model.add_constraint(
                        {ids["p_dis"][w, t]: 1.0, ids["x_dis"][w, t]: -dis_cap}, "<=", 0.0
                    )
                model.add_constraint(
                    {ids["x_ch"][w, t]: 1.0, ids["x_dis"][w, t]: 1.0}, "<=", 1.0
                )
            row = {
                ids["e"][w, t]: 1.0,
                ids["p_ch"][w, t]: -eta_ch * dt,
                ids["p_dis"][w, t]: dt / eta_dis,
            }
            if t > 0:
                row[ids["e"][w, t - 1]] = -1.0
            model.add_constraint(row, "=", 0.0)


def _add_grid_rows(
    model: MilpModel,
    inst: Instance,
    ids: dict[str, np.ndarray],
    demand: np.ndarray,
    renewable: np.ndarray,
    *,
    equality: bool,
    s_var: int | None,
    relaxed: bool,
) -> None:
    """Supply/demand balance with grid trading, buy/sell exclusivity, and the
    trading power caps. In the joint market program the balance is the
    free-disposal inequality and the demand term is gated by the
    accept/reject flag; standalone programs use the equality form."""
    omega, periods = ids["e"].shape
    p_max = inst.tariff.p_grid_max
    for w in range(omega):
        for t in range(periods):
            row = {
                ids["p_gplus"][w, t]: 1.0,
                ids["p_gminus"][w, t]: -1.0,
                ids["p_ch"][w, t]: -1.0,
                ids["p_dis"][w, t]: 1.0,
            }
            rhs = -renewable[w, t]
            if s_var is None:
                rhs += demand[w, t]
            else:
                row[s_var] = -demand[w, t]
            model.add_constraint(row, "=" if equality else ">=", rhs)
            if relaxed:
                continue
            model.add_constraint(
                {ids["x_gplus"][w, t]: 1.0, ids["x_gminus"][w, t]: 1.0}, "<=", 1.0
            )
            model.add_constraint(
                {ids["p_gplus"][w, t]: 1.0, ids["x_gplus"][w, t]: -p_max}, "<=", 0.0
            )
            model.add_constraint(
                {ids["p_gminus"][w, t]: 1.0, ids["x_gminus"][w, t]: -p_max}, "<=", 0.0
            )
    if relaxed:
        # without buy/sell binaries the trading caps are plain rows
        for w in range(omega):
            for t in range(periods):
                model.add_constraint({ids["p_gplus"][w, t]: 1.0}, "<=", p_max)
                model.add_constraint({ids["p_gminus"][w, t]: 1.0}, "<=", p_max)


def _bill_coefficients(
    ids: dict[str, np.ndarray], probs: np.ndarray, inst: Instance
) -> dict[int, float]:
    """Sparse objective/row coefficients of the expected bill."""
    dt = inst.time.dt_hours
    coeffs: dict[int, float] = {}
    omega, periods = ids["e"].shape
    for w in range(omega):
        wbuy = probs[w] * dt * inst.tariff.buy
        wsell = probs[w] * dt * inst.tariff.sell
        for t in range(periods):
            coeffs[int(ids["p_gplus"][w, t])] = wbuy
            if wsell:
                coeffs[int(ids["p_gminus"][w, t])] = -wsell
    return coeffs


def build_market_program(
    inst: Instance,
    j_ind: np.ndarray | None = None,
    *,
    incentive: bool = True,
    relax_exclusivity: bool = False,
) -> tuple[MilpModel, MarketIndex]:
    """Assemble the joint shared-storage program.

    With `incentive` the operator maximizes profit subject to per-building
    participation rationality and accept/reject gating (requires each
    building's standalone cost `j_ind`); without it every building is
    served and total cost is minimized, which yields the community optimum.
    """
    n = inst.n_buildings
    demand, renewable, probs = profile_arrays(inst)
    omega, periods = demand.shape[1], demand.shape[2]
    spread = inst.tariff.spread

    if incentive:
        if j_ind is None:
            raise MissingIesInputError(
                "standalone storage costs are required; run the individual "
                "sizing solves first"
            )
        j_ind = np.asarray(j_ind, dtype=float)
        if j_ind.shape != (n,):
            raise MissingIesInputError(
                f"expected {n} standalone costs, got shape {j_ind.shape}"
            )

    model = MilpModel("max" if incentive else "min")
    cells = {name: np.empty((n, omega, periods), dtype=np.int64) for name in CELL_FIELDS}
    for i in range(n):
        ids = _add_cell_variables(
            model, omega, periods, renewable[i], f"{i},", relax_exclusivity,
            inst.tech.p_ch_max, inst.tech.p_dis_max,
        )
        for name in CELL_FIELDS:
            cells[name][i] = ids[name]
    r_ids = np.empty(n, dtype=np.int64)
    s_ids = np.empty(n, dtype=np.int64)
    for i in range(n):
        r_ids[i] = model.add_variable(inst.r_min[i], inst.r_max[i], name=f"r[{i}]")
        s_lb = 0.0 if incentive else 1.0
        s_ids[i] = model.add_variable(s_lb, 1.0, kind=BINARY, name=f"s[{i}]")
    e_cap = model.add_variable(0, np.inf, name="E")
    p_cap = model.add_variable(0, np.inf, name="P")

    for i in range(n):
        ids_i = {name: cells[name][i] for name in CELL_FIELDS}
        _add_storage_rows(
            model, inst, ids_i,
            ch_cap=inst.tech.p_ch_max, dis_cap=inst.tech.p_dis_max,
            relaxed=relax_exclusivity,
        )
        _add_grid_rows(
            model, inst, ids_i, demand[i], renewable[i],
            equality=False, s_var=int(s_ids[i]), relaxed=relax_exclusivity,
        )
        if incentive:
            # a rejected building gets no service at all: without this gate
            # the operator could harvest its renewable output as free
            # peak-shaving capacity and undersize the shared power rating
            for w in range(omega):
                for t in range(periods):
                    model.add_constraint(
                        {int(cells["p_ch"][i, w, t]): 1.0,
                         int(s_ids[i]): -inst.tech.p_ch_max}, "<=", 0.0,
                    )
                    model.add_constraint(
                        {int(cells["p_dis"][i, w, t]): 1.0,
                         int(s_ids[i]): -inst.tech.p_dis_max}, "<=", 0.0,
                    )

    # shared capacity caps: total stored energy and net power per period
    for w in range(omega):
        for t in range(periods):
            soc_row = {int(cells["e"][i, w, t]): 1.0 for i in range(n)}
            soc_row[e_cap] = -1.0
            model.add_constraint(soc_row, "<=", 0.0)
            net = {int(cells["p_ch"][i, w, t]): 1.0 for i in range(n)}
            for i in range(n):
                net[int(cells["p_dis"][i, w, t])] = -1.0
            up = dict(net)
            up[p_cap] = -1.0
            model.add_constraint(up, "<=", 0.0)
            dn = {j: -v for j, v in net.items()}
            dn[p_cap] = -1.0
            model.add_constraint(dn, "<=", 0.0)

    for i in range(n):
        ids_i = {name: cells[name][i] for name in CELL_FIELDS}
        bill = _bill_coefficients(ids_i, probs, inst)
        # served-request row: the bill must drop by the full credited amount
        row6 = dict(bill)
        row6[int(r_ids[i])] = row6.get(int(r_ids[i]), 0.0) + spread
        model.add_constraint(row6, "<=", float(inst.baseline_bills[i]))
        if incentive:
            row9a = dict(bill)
            row9a[int(r_ids[i])] = row9a.get(int(r_ids[i]), 0.0) + spread / 2.0
            row9a[int(s_ids[i])] = -float(j_ind[i])
            model.add_constraint(row9a, "<=", 0.0)
            model.add_constraint(
                {int(r_ids[i]): 1.0, int(s_ids[i]): -float(inst.r_max[i])}, "<=", 0.0
            )

    if incentive:
        objective = {int(r_ids[i]): spread / 2.0 for i in range(n)}
        objective[e_cap] = -inst.tech.c_e
        objective[p_cap] = -inst.tech.c_p
    else:
        objective = {int(r_ids[i]): -spread for i in range(n)}
        objective[e_cap] = inst.tech.c_e
        objective[p_cap] = inst.tech.c_p
    model.set_objective(objective)

    index = MarketIndex(
        cells=cells, r=r_ids, s=s_ids, e_cap=e_cap, p_cap=p_cap,
        relaxed=relax_exclusivity,
    )
    return model, index


def build_bc_sizing_program(
    inst: Instance,
    i: int,
    *,
    rus_target: float | None = None,
    include_bill: bool = True,
    relax_exclusivity: bool = False,
) -> tuple[MilpModel, BcIndex]:
    """Standalone sizing + operation program for building `i`.

    With a `rus_target` the objective is the capital cost alone subject to
    serving that request; without one the total (bill plus capital) cost is
    minimized, which defines the building's participation benchmark.
    """
    demand, renewable, probs = profile_arrays(inst)
    demand, renewable = demand[i], renewable[i]
    omega, periods = demand.shape
    model = MilpModel("min")
    ids = _add_cell_variables(
        model, omega, periods, renewable, "", relax_exclusivity,
        inst.tech.p_ch_max, inst.tech.p_dis_max,
    )
    e_cap = model.add_variable(0, np.inf, name="E_i")
    p_cap = model.add_variable(0, np.inf, name="P_i")

    _add_storage_rows(
        model, inst, ids,
        ch_cap=inst.tech.p_ch_max, dis_cap=inst.tech.p_dis_max,
        relaxed=relax_exclusivity,
    )
    _add_grid_rows(
        model, inst, ids, demand, renewable,
        equality=True, s_var=None, relaxed=relax_exclusivity,
    )
    for w in range(omega):
        for t in range(periods):
            model.add_constraint({int(ids["e"][w, t]): 1.0, e_cap: -1.0}, "<=", 0.0)
            model.add_constraint({int(ids["p_ch"][w, t]): 1.0, p_cap: -1.0}, "<=", 0.0)
            model.add_constraint({int(ids["p_dis"][w, t]): 1.0, p_cap: -1.0}, "<=", 0.0)

    bill = _bill_coefficients(ids, probs, inst)
    if rus_target is not None:
        model.add_constraint(
            dict(bill), "<=",
            float(inst.baseline_bills[i]) - inst.tariff.spread * float(rus_target),
        )
    objective = {e_cap: inst.tech.c_e, p_cap: inst.tech.c_p}
    if include_bill:
        for j, v in bill.items():
            objective[j] = objective.get(j, 0.0) + v
    model.set_objective(objective)
    return model, BcIndex(cells=ids, e_cap=e_cap, p_cap=p_cap, relaxed=relax_exclusivity)


def build_bc_lease_program(
    inst: Instance,
    i: int,
    lease_price: float,
    *,
    relax_exclusivity: bool = False,
) -> tuple[MilpModel, BcIndex]:
    """Capacity-lease best response of building `i`: minimize bill plus a
    linear fee on the rented energy capacity; no rate limits apply, so the
    exclusivity binaries are coupled through instance-derived big-Ms."""
    if lease_price < 0:
        raise ValueError(f"lease price must be >= 0, got {lease_price}")
    demand, renewable, probs = profile_arrays(inst)
    demand, renewable = demand[i], renewable[i]
    omega, periods = demand.shape
    m_ch = float(renewable.max(initial=0.0))
    m_dis = m_ch + float(demand.max(initial=0.0)) + inst.tariff.p_grid_max

    model = MilpModel("min")
    ids = _add_cell_variables(
        model, omega, periods, renewable, "", relax_exclusivity, m_ch, m_dis
    )
    cap = model.add_variable(0, np.inf, name="cap_i")
    _add_storage_rows(model, inst, ids, ch_cap=m_ch, dis_cap=m_dis,
                      relaxed=relax_exclusivity)
    _add_grid_rows(model, inst, ids, demand, renewable,
                   equality=True, s_var=None, relaxed=relax_exclusivity)
    for w in range(omega):
        for t in range(periods):
            model.add_constraint({int(ids["e"][w, t]): 1.0, cap: -1.0}, "<=", 0.0)

    objective = _bill_coefficients(ids, probs, inst)
    objective[cap] = objective.get(cap, 0.0) + float(lease_price)
    model.set_objective(objective)
    return model, BcIndex(cells=ids, lease_cap=cap, relaxed=relax_exclusivity)


def extract_schedule(x: np.ndarray, cells: dict[str, np.ndarray]) -> OperationSchedule:
    """Read dispatch arrays out of a solution vector; indexes may be (N,
    omega, T) or ((omega, T)) which is promoted to a single-building axis."""
    def pick(name: str, integral: bool) -> np.ndarray:
        ids = cells[name]
        if ids.ndim == 2:
            ids = ids[None, :, :]
        if integral:
            if (ids < 0).all():
                # relaxed mode: reconstruct flags from the coupled flows
                flow = {"x_ch": "p_ch", "x_dis": "p_dis",
                        "x_gplus": "p_gplus", "x_gminus": "p_gminus"}[name]
                vals = pick(flow, False)
                return (vals > 1e-9).astype(int)
            return np.round(x[ids]).astype(int)
        return x[ids].astype(float)

    return OperationSchedule(
        p_ch=pick("p_ch", False),
        p_dis=pick("p_dis", False),
        e=pick("e", False),
        p_gplus=pick("p_gplus", False),
        p_gminus=pick("p_gminus", False),
        x_ch=pick("x_ch", True),
        x_dis=pick("x_dis", True),
        x_gplus=pick("x_gplus", True),
        x_gminus=pick("x_gminus", True),
    )
