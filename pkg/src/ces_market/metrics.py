"""Welfare accounting: social cost rows with reconciled components, the
normalized relative-social-cost ratio, per-consumer incentives, and storage
utilization statistics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .formulations import (
    CES,
    VES,
    CesOutcome,
    ModelOutcome,
    OperationSchedule,
    VesOutcome,
)
from .instance import Instance, TimeGrid

__all__ = [
    "AccountingError",
    "SocialCostRow",
    "UtilizationStats",
    "social_cost",
    "rsc",
    "consumer_incentive",
    "utilization_stats",
]

RECONCILE_TOL = 1e-6


class AccountingError(ArithmeticError):
    """Components of a solved outcome do not reconcile; this signals a
    formulation bug, not bad input."""


@dataclass(frozen=True)
class SocialCostRow:
    """One model's social cost and its reconciled components.

    Market payments are transfers between consumers and the operator, so
    social cost is always total bills plus capital cost; for the operator
    models the profit equals payments minus the operator's capital.
    Rejected consumers fall back to standalone storage, and that fallback
    cost rides in `bills`.
    """

    model: str
    social_cost: float
    bills: float
    payments: float
    capital: float
    eso_profit: float | None

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "social_cost": self.social_cost,
            "bills": self.bills,
            "payments": self.payments,
            "capital": self.capital,
            "eso_profit": self.eso_profit,
        }


@dataclass
class UtilizationStats:
    """Aggregate storage utilization against the sized capacities.

    `energy_pct` and `power_pct` are (scenario, period) percentage grids;
    per-building state-of-charge traces are retained for plotting. Empty
    when no storage was built.
    """

    energy_pct: np.ndarray
    power_pct: np.ndarray
    mean_energy_pct: float
    peak_energy_pct: float
    mean_power_pct: float
    peak_power_pct: float
    soc_traces: np.ndarray  # (N, scenario, period)

    @property
    def empty(self) -> bool:
        return self.energy_pct.size == 0


def social_cost(outcome, inst: Instance) -> SocialCostRow:
    """Build the social-cost row of any solved outcome and verify that its
    components reconcile (profit against payments minus capital)."""
    if isinstance(outcome, CesOutcome):
        capital = inst.tech.c_e * outcome.e_capacity + inst.tech.c_p * outcome.p_capacity
        bills = float(outcome.bills.sum())
        payments = float(outcome.payments.sum())
        profit = outcome.eso_profit
        _reconcile(profit, payments - capital, CES)
        return SocialCostRow(CES, bills + capital, bills, payments, capital, profit)
    if isinstance(outcome, VesOutcome):
        eq = outcome.equilibrium
        capital = inst.tech.c_e * eq.e_capacity + inst.tech.c_p * eq.p_capacity
        bills = float(eq.bills.sum())
        payments = float(eq.price * eq.capacities.sum())
        _reconcile(eq.eso_profit, payments - capital, VES)
        _reconcile(float(eq.bc_costs.sum()), bills + payments, VES)
        return SocialCostRow(VES, bills + capital, bills, payments, capital, eq.eso_profit)
    if isinstance(outcome, ModelOutcome):
        bills = float(outcome.bills.sum()) if outcome.bills is not None else 0.0
        capital = 0.0
        if outcome.e_capacity is not None:
            capital = (
                inst.tech.c_e * outcome.e_capacity + inst.tech.c_p * outcome.p_capacity
            )
        _reconcile(outcome.social_cost, bills + capital, outcome.model)
        return SocialCostRow(outcome.model, outcome.social_cost, bills, 0.0, capital, None)
    raise TypeError(f"unsupported outcome type {type(outcome).__name__}")


def _reconcile(lhs: float, rhs: float, model: str) -> None:
    residual = abs(lhs - rhs)
    if residual > RECONCILE_TOL * max(1.0, abs(lhs), abs(rhs)):
        raise AccountingError(
            f"{model} components do not reconcile: |{lhs} - {rhs}| = {residual}"
        )


def rsc(sc_model: float, sc_cmes: float, sc_woes: float) -> float:
    """Relative social cost: 0 at the community optimum, 1 at no-storage.

    Values are intentionally not clamped; anything outside [0, 1] signals a
    violated bound upstream.
    """
    denom = sc_woes - sc_cmes
    if denom <= 1e-9:
        raise ValueError(
            f"degenerate normalization: no-storage cost {sc_woes} does not "
            f"exceed the community optimum {sc_cmes}"
        )
    return (sc_model - sc_cmes) / denom


def consumer_incentive(outcome, inst: Instance) -> np.ndarray:
    """Per-building cost reduction against the no-storage baseline."""
    if isinstance(outcome, CesOutcome):
        cost = outcome.bills + outcome.payments
    elif isinstance(outcome, VesOutcome):
        cost = outcome.equilibrium.bc_costs
    elif isinstance(outcome, ModelOutcome):
        cost = outcome.per_bc_cost
    else:
        raise TypeError(f"unsupported outcome type {type(outcome).__name__}")
    return inst.baseline_bills - np.asarray(cost, dtype=float)


def utilization_stats(
    schedule: OperationSchedule,
    e_capacity: float,
    p_capacity: float,
    grid: TimeGrid,
) -> UtilizationStats:
    """Percent utilization of the sized energy and power capacities per
    (scenario, period), with time-averaged and peak summaries."""
    if e_capacity <= 0:
        empty = np.zeros((0, 0))
        return UtilizationStats(empty, empty, 0.0, 0.0, 0.0, 0.0,
                                np.zeros((0, 0, 0)))
    energy = schedule.aggregate_soc() / e_capacity * 100.0
    if p_capacity > 0:
        power = np.abs(schedule.aggregate_net_power()) / p_capacity * 100.0
    else:
        power = np.zeros_like(energy)
    return UtilizationStats(
        energy_pct=energy,
        power_pct=power,
        mean_energy_pct=float(energy.mean()),
        peak_energy_pct=float(energy.max()),
        mean_power_pct=float(power.mean()),
        peak_power_pct=float(power.max()),
        soc_traces=schedule.e.copy(),
    )
