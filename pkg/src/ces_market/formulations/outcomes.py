"""Result containers shared by the market models, plus an independent
re-evaluation of schedule physics used by verification and tests."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..instance import Instance
from ..milp import MilpSolution

__all__ = [
    "OperationSchedule",
    "CesOutcome",
    "ModelOutcome",
    "IesBcResult",
    "IesResult",
    "QuadraticFit",
    "VesBcResult",
    "VesPricePoint",
    "VesOutcome",
    "profile_arrays",
    "expected_bills",
    "schedule_residuals",
]

WO_ES = "WO_ES"
IES = "IES"
VES = "VES"
CES = "CES"
CMES = "CMES"


@dataclass
class OperationSchedule:
    """Dispatch trajectories, one entry per (building, scenario, period).

    `e` is the state of charge at the end of each period (starting level is
    zero); powers are kW, energies kWh.
    """

    p_ch: np.ndarray
    p_dis: np.ndarray
    e: np.ndarray
    p_gplus: np.ndarray
    p_gminus: np.ndarray
    x_ch: np.ndarray
    x_dis: np.ndarray
    x_gplus: np.ndarray
    x_gminus: np.ndarray

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.p_ch.shape

    def aggregate_soc(self) -> np.ndarray:
        """Total stored energy per (scenario, period)."""
        return self.e.sum(axis=0)

    def aggregate_net_power(self) -> np.ndarray:
        """Net charging power (charge minus discharge) per (scenario, period)."""
        return (self.p_ch - self.p_dis).sum(axis=0)

    @classmethod
    def zeros(cls, n: int, omega: int, periods: int) -> "OperationSchedule":
        z = lambda: np.zeros((n, omega, periods))
        zi = lambda: np.zeros((n, omega, periods), dtype=int)
        return cls(z(), z(), z(), z(), z(), zi(), zi(), zi(), zi())

    @classmethod
    def stack(cls, parts: list["OperationSchedule"]) -> "OperationSchedule":
        """Stack per-building (1, omega, T) schedules into one (N, omega, T)."""
        fields_ = {}
        for name in ("p_ch", "p_dis", "e", "p_gplus", "p_gminus",
                     "x_ch", "x_dis", "x_gplus", "x_gminus"):
            fields_[name] = np.concatenate([getattr(p, name) for p in parts], axis=0)
        return cls(**fields_)


def profile_arrays(inst: Instance) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Demand and renewable stacked as (N, omega, T) plus the shared
    scenario probability vector."""
    demand = np.stack(
        [np.stack([sc.demand for sc in b.scenarios]) for b in inst.buildings]
    )
    renewable = np.stack(
        [np.stack([sc.renewable for sc in b.scenarios]) for b in inst.buildings]
    )
    probs = np.array([sc.prob for sc in inst.buildings[0].scenarios])
    return demand, renewable, probs


def expected_bills(schedule: OperationSchedule, inst: Instance) -> np.ndarray:
    """Per-building expected bill implied by the grid flows of a schedule."""
    _, _, probs = profile_arrays(inst)
    dt = inst.time.dt_hours
    buy = schedule.p_gplus.sum(axis=2)  # (N, omega)
    sell = schedule.p_gminus.sum(axis=2)
    per_scenario = inst.tariff.buy * buy - inst.tariff.sell * sell
    return (per_scenario * probs[None, :]).sum(axis=1) * dt


def schedule_residuals(
    schedule: OperationSchedule,
    inst: Instance,
    e_capacity: float | None = None,
    p_capacity: float | None = None,
) -> dict[str, float]:
    """Independent physics re-evaluation; every value is a worst-case
    violation magnitude (zero means the property holds exactly).

    Checks the state-of-charge recursion, charge/discharge and buy/sell
    exclusivity products, renewable-only charging, sign constraints, and —
    when capacities are given — the aggregate energy and power caps.
    """
    demand, renewable, _ = profile_arrays(inst)
    dt = inst.time.dt_hours
    tech = inst.tech
    e_prev = np.concatenate(
        [np.zeros_like(schedule.e[:, :, :1]), schedule.e[:, :, :-1]], axis=2
    )
    recursion = schedule.e - e_prev - (
        schedule.p_ch * tech.eta_ch - schedule.p_dis / tech.eta_dis
    ) * dt
    out = {
        "soc_recursion": float(np.abs(recursion).max(initial=0.0)),
        "storage_exclusivity": float((schedule.p_ch * schedule.p_dis).max(initial=0.0)),
        "grid_exclusivity": float((schedule.p_gplus * schedule.p_gminus).max(initial=0.0)),
        "renewable_only_charging": float((schedule.p_ch - renewable).max(initial=0.0)),
        "nonnegative": float(
            max(
                0.0,
                -min(
                    arr.min(initial=0.0)
                    for arr in (
                        schedule.p_ch,
                        schedule.p_dis,
                        schedule.e,
                        schedule.p_gplus,
                        schedule.p_gminus,
                    )
                ),
            )
        ),
        "grid_power_cap": float(
            max(
                (schedule.p_gplus - inst.tariff.p_grid_max).max(initial=0.0),
                (schedule.p_gminus - inst.tariff.p_grid_max).max(initial=0.0),
            )
        ),
    }
    if e_capacity is not None:
        out["aggregate_energy_cap"] = float(
            (schedule.aggregate_soc() - e_capacity).max(initial=0.0)
        )
    if p_capacity is not None:
        out["aggregate_power_cap"] = float(
            (np.abs(schedule.aggregate_net_power()) - p_capacity).max(initial=0.0)
        )
    return out


@dataclass
class CesOutcome:
    """Market equilibrium: per-building requests, prices and payments, the
    operator's sizing and profit, and the full dispatch."""

    r_star: np.ndarray
    q_star: np.ndarray  # NaN where rejected
    accepted: np.ndarray  # bool
    payments: np.ndarray
    bills: np.ndarray  # market bill if accepted, standalone fallback cost if rejected
    e_capacity: float
    p_capacity: float
    eso_profit: float
    schedule: OperationSchedule
    j_ind: np.ndarray
    solution: MilpSolution
    certified: bool = True

    @property
    def model(self) -> str:
        return CES


@dataclass
class ModelOutcome:
    """Uniform envelope for the flat models (no-storage, community, and the
    per-building aggregate of individual storage)."""

    model: str
    per_bc_cost: np.ndarray
    social_cost: float
    bills: np.ndarray | None = None
    r: np.ndarray | None = None
    e_capacity: float | None = None
    p_capacity: float | None = None
    eso_profit: float | None = None
    schedule: OperationSchedule | None = None
    solution: MilpSolution | None = None
    certified: bool = True


@dataclass
class IesBcResult:
    """Joint sizing + operation optimum of one building acting alone."""

    building: str
    j_ind: float
    r_hat: float
    e_hat: float
    p_hat: float
    bill: float
    schedule: OperationSchedule  # shape (1, omega, T)
    solution: MilpSolution
    curve: list[tuple[float, float]] | None = None
    q_hat: float | None = None
    fit_r2: float | None = None


@dataclass
class IesResult:
    per_bc: list[IesBcResult]

    @property
    def j_ind(self) -> np.ndarray:
        return np.array([r.j_ind for r in self.per_bc])

    @property
    def total_cost(self) -> float:
        return float(self.j_ind.sum())


@dataclass(frozen=True)
class QuadraticFit:
    """Least-squares quadratic through the origin: payment ~= q_hat * r**2."""

    q_hat: float
    r_squared: float


@dataclass
class VesBcResult:
    """One building's best response to a linear capacity lease price."""

    capacity: float
    total_cost: float  # bill plus lease payment
    bill: float
    schedule: OperationSchedule  # shape (1, omega, T)
    solution: MilpSolution


@dataclass
class VesPricePoint:
    price: float
    capacities: np.ndarray
    bc_costs: np.ndarray
    bills: np.ndarray
    e_capacity: float
    p_capacity: float
    eso_profit: float


@dataclass
class VesOutcome:
    """Full capacity-lease price sweep plus the profit-maximizing point."""

    prices: np.ndarray
    points: list[VesPricePoint]
    equilibrium_index: int
    schedule: OperationSchedule  # dispatch at the equilibrium price

    @property
    def model(self) -> str:
        return VES

    @property
    def equilibrium(self) -> VesPricePoint:
        return self.points[self.equilibrium_index]

    @property
    def equilibrium_price(self) -> float:
        return float(self.prices[self.equilibrium_index])

    @property
    def eso_profit(self) -> float:
        return self.equilibrium.eso_profit
