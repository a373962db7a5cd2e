"""Orchestration: run a single model or the full comparison on an instance
and write the result bundle."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import bundle
from .formulations import (
    CES,
    CMES,
    IES,
    VES,
    WO_ES,
    CesOutcome,
    IesResult,
    VesOutcome,
    default_price_grid,
    ies_outcome,
    solve_baseline,
    solve_ces,
    solve_cmes,
    solve_ies,
    ves_equilibrium,
)
from .game import verify_equilibrium
from .instance import load_instance
from .metrics import consumer_incentive, rsc, social_cost, utilization_stats
from .milp import SolveParams

__all__ = ["RunConfig", "RunResult", "MODEL_CHOICES", "run"]

MODEL_CHOICES = ("baseline", "ies", "cmes", "ces", "ves", "compare")


@dataclass
class RunConfig:
    """Everything one invocation needs: instance, model selector, solver
    parameters, the lease price grid, and the output directory."""

    instance: Path
    out_dir: Path
    model: str = "compare"
    seed: int = 0
    params: SolveParams = field(default_factory=SolveParams)
    price_start: float = 0.05
    price_stop: float = 0.5
    price_step: float = 0.002
    curve_step: float = 10.0
    backend: str = "reference"

    def price_grid(self) -> np.ndarray:
        return default_price_grid(self.price_start, self.price_stop, self.price_step)


@dataclass
class RunResult:
    payload: dict
    certified: bool
    files: list[Path]


def _ies_payload(result: IesResult) -> dict:
    return {
        "social_cost": float(result.j_ind.sum()),
        "per_bc": [
            {
                "building": r.building,
                "j_ind": r.j_ind,
                "r_hat": r.r_hat,
                "e_hat": r.e_hat,
                "p_hat": r.p_hat,
                "bill": r.bill,
                "q_hat": r.q_hat,
                "fit_r2": r.fit_r2,
            }
            for r in result.per_bc
        ],
    }


def _ces_payload(outcome: CesOutcome) -> dict:
    return {
        "eso_profit": outcome.eso_profit,
        "e_capacity": outcome.e_capacity,
        "p_capacity": outcome.p_capacity,
        "r_star": outcome.r_star,
        "q_star": [None if math.isnan(q) else q for q in outcome.q_star],
        "accepted": outcome.accepted,
        "payments": outcome.payments,
        "bills": outcome.bills,
        "status": outcome.solution.status.value,
        "gap": outcome.solution.gap,
        "node_count": outcome.solution.node_count,
    }


def _ves_payload(outcome: VesOutcome) -> dict:
    eq = outcome.equilibrium
    return {
        "equilibrium_price": outcome.equilibrium_price,
        "eso_profit": eq.eso_profit,
        "e_capacity": eq.e_capacity,
        "p_capacity": eq.p_capacity,
        "capacities": eq.capacities,
        "bc_costs": eq.bc_costs,
        "bills": eq.bills,
        "grid_points": len(outcome.prices),
    }


def run(config: RunConfig) -> RunResult:
    """Execute the selected model(s) in dependency order and write the
    bundle. `compare` runs baseline, individual sizing (whose costs feed
    the market program), community optimum, the operator market, and the
    lease sweep."""
    inst = load_instance(config.instance)
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    params = config.params
    backend = config.backend
    names = inst.building_names()

    want = config.model
    need_baseline = want in ("baseline", "compare")
    need_ies = want in ("ies", "ces", "compare")
    need_cmes = want in ("cmes", "compare")
    need_ces = want in ("ces", "compare")
    need_ves = want in ("ves", "compare")

    models: dict = {}
    files: list[Path] = []
    certified = True

    baseline = solve_baseline(inst) if need_baseline or want == "compare" else None
    if baseline is not None:
        models[WO_ES] = {"social_cost": baseline.social_cost, "bills": baseline.bills}

    ies = None
    if need_ies:
        ies = solve_ies(inst, params, curves=want in ("ies", "compare"),
                        curve_step=config.curve_step, backend=backend)
        models[IES] = _ies_payload(ies)

    cmes = None
    if need_cmes:
        cmes = solve_cmes(inst, params, backend=backend)
        certified &= cmes.certified
        models[CMES] = {
            "social_cost": cmes.social_cost,
            "e_capacity": cmes.e_capacity,
            "p_capacity": cmes.p_capacity,
            "r": cmes.r,
        }

    ces = None
    equilibrium_report = None
    if need_ces:
        ces = solve_ces(inst, params, j_ind=ies.j_ind, backend=backend)
        certified &= ces.certified
        models[CES] = _ces_payload(ces)
        equilibrium_report = verify_equilibrium(ces, inst)

    ves = None
    if need_ves:
        ves = ves_equilibrium(inst, config.price_grid(), params, backend=backend)
        models[VES] = _ves_payload(ves)

    metrics_block, csv_plan = _metrics_and_tables(
        inst, names, baseline, ies, cmes, ces, ves
    )

    payload = {
        "schema": bundle.SCHEMA_VERSION,
        "instance": {
            "name": inst.name,
            "path": str(config.instance),
            "n_buildings": inst.n_buildings,
            "periods": inst.time.T,
            "dt_hours": inst.time.dt_hours,
            "scenarios": inst.n_scenarios,
        },
        "config": {
            "model": config.model,
            "seed": config.seed,
            "backend": backend,
            "gap": params.rel_gap,
            "time_limit": params.time_limit,
            "node_limit": params.node_limit,
            "price_grid": {
                "start": config.price_start,
                "stop": config.price_stop,
                "step": config.price_step,
            },
        },
        "models": models,
        "metrics": metrics_block,
        "equilibrium_report": (
            equilibrium_report.to_dict() if equilibrium_report is not None else None
        ),
        "certified": certified,
    }

    for name, header, rows in csv_plan:
        path = out / name
        bundle.write_csv(path, header, rows)
        files.append(path)
    results_path = out / "results.json"
    bundle.write_json(results_path, payload)
    files.append(results_path)
    return RunResult(payload=payload, certified=certified, files=files)


def _metrics_and_tables(inst, names, baseline, ies, cmes, ces, ves):
    """All metric aggregation plus the CSV writing plan for whatever subset
    of models was solved."""
    rows_sc, incent, util = {}, {}, {}
    csv_plan: list[tuple[str, list[str], list[list]]] = []

    outcomes = {}
    if baseline is not None:
        outcomes[WO_ES] = baseline
    if ies is not None:
        outcomes[IES] = ies_outcome(ies, inst)
    if ves is not None:
        outcomes[VES] = ves
    if ces is not None:
        outcomes[CES] = ces
    if cmes is not None:
        outcomes[CMES] = cmes

    for tag, outcome in outcomes.items():
        rows_sc[tag] = social_cost(outcome, inst)

    rsc_values = {}
    if WO_ES in rows_sc and CMES in rows_sc:
        sc_woes = rows_sc[WO_ES].social_cost
        sc_cmes = rows_sc[CMES].social_cost
        if sc_woes - sc_cmes > 1e-9:
            for tag, row in rows_sc.items():
                rsc_values[tag] = rsc(row.social_cost, sc_cmes, sc_woes)

    for tag in (IES, VES, CES):
        if tag in outcomes:
            incent[tag] = consumer_incentive(outcomes[tag], inst)

    if ces is not None:
        util[CES] = utilization_stats(
            ces.schedule, ces.e_capacity, ces.p_capacity, inst.time
        )
    if ves is not None:
        eq = ves.equilibrium
        util[VES] = utilization_stats(
            ves.schedule, eq.e_capacity, eq.p_capacity, inst.time
        )

    metrics_block = {
        "social_cost": {tag: row.to_dict() for tag, row in rows_sc.items()},
        "rsc": rsc_values,
        "incentives": {tag: vals for tag, vals in incent.items()},
        "utilization": {
            tag: {
                "mean_energy_pct": u.mean_energy_pct,
                "peak_energy_pct": u.peak_energy_pct,
                "mean_power_pct": u.mean_power_pct,
                "peak_power_pct": u.peak_power_pct,
            }
            for tag, u in util.items()
        },
    }

    order = [t for t in (WO_ES, IES, VES, CES, CMES) if t in rows_sc]
    if rows_sc:
        csv_plan.append((
            "table_social_cost.csv",
            ["model", "social_cost", "bills", "payments", "capital", "eso_profit", "rsc"],
            [
                [
                    t,
                    rows_sc[t].social_cost,
                    rows_sc[t].bills,
                    rows_sc[t].payments,
                    rows_sc[t].capital,
                    "" if rows_sc[t].eso_profit is None else rows_sc[t].eso_profit,
                    "" if t not in rsc_values else rsc_values[t],
                ]
                for t in order
            ],
        ))
    profit_rows = [
        [t, rows_sc[t].eso_profit]
        for t in (VES, CES)
        if t in rows_sc and rows_sc[t].eso_profit is not None
    ]
    if profit_rows:
        csv_plan.append(("table_eso_profit.csv", ["model", "eso_profit"], profit_rows))

    if ies is not None and ces is not None:
        csv_plan.append((
            "table_rus_price.csv",
            ["building", "r_hat_ies", "q_hat_ies", "r_star_ces", "q_star_ces", "accepted"],
            [
                [
                    names[i],
                    ies.per_bc[i].r_hat,
                    "" if ies.per_bc[i].q_hat is None else ies.per_bc[i].q_hat,
                    ces.r_star[i],
                    "" if not ces.accepted[i] else ces.q_star[i],
                    int(ces.accepted[i]),
                ]
                for i in range(inst.n_buildings)
            ],
        ))

    if ies is not None and any(r.curve for r in ies.per_bc):
        curve_rows = []
        for i, r in enumerate(ies.per_bc):
            for r_point, cost in r.curve or []:
                curve_rows.append(
                    [names[i], r_point, "" if not np.isfinite(cost) else cost]
                )
        csv_plan.append(("ies_curves.csv", ["building", "r", "capital_cost"], curve_rows))

    if incent:
        csv_plan.append((
            "incentives.csv",
            ["model", "building", "incentive"],
            [
                [tag, names[i], incent[tag][i]]
                for tag in (IES, VES, CES)
                if tag in incent
                for i in range(inst.n_buildings)
            ],
        ))

    sched_rows = []
    if cmes is not None and cmes.schedule is not None:
        sched_rows += bundle.schedule_rows(CMES, names, cmes.schedule)
    if ces is not None:
        sched_rows += bundle.schedule_rows(CES, names, ces.schedule)
    if ves is not None:
        sched_rows += bundle.schedule_rows(VES, names, ves.schedule)
    if sched_rows:
        csv_plan.append((
            "schedules.csv",
            ["model", "building", "scenario", "t", "p_ch", "p_dis", "e", "p_gplus", "p_gminus"],
            sched_rows,
        ))

    util_rows = []
    for tag, u in util.items():
        if u.empty:
            continue
        omega, periods = u.energy_pct.shape
        for w in range(omega):
            for t in range(periods):
                util_rows.append([tag, w, t, u.energy_pct[w, t], u.power_pct[w, t]])
    if util_rows:
        csv_plan.append((
            "utilization.csv",
            ["model", "scenario", "t", "energy_pct", "power_pct"],
            util_rows,
        ))

    if ves is not None:
        header = ["price", "total_capacity", "eso_profit", "is_equilibrium"] + [
            f"cost_{n}" for n in names
        ]
        sweep_rows = [
            [
                p.price,
                float(p.capacities.sum()),
                p.eso_profit,
                int(k == ves.equilibrium_index),
            ]
            + list(p.bc_costs)
            for k, p in enumerate(ves.points)
        ]
        csv_plan.append(("ves_sweep.csv", header, sweep_rows))

    return metrics_block, csv_plan
