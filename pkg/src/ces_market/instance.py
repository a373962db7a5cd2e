"""Market instance data model: time grid, tariff, storage technology, building
scenario profiles, and the offline quantities derived from them (amortized
capital prices, baseline bills, shiftable-energy bounds).

Instances are immutable after construction; every function here is pure.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "TimeGrid",
    "GridTariff",
    "StorageTech",
    "Scenario",
    "BuildingProfile",
    "Instance",
    "Diagnostic",
    "InstanceError",
    "InstanceFormatError",
    "InstanceValidationError",
    "amortize",
    "max_rus",
    "baseline_bill",
    "build_instance",
    "load_instance",
    "validate_instance",
]

PROB_TOL = 1e-9


class InstanceError(Exception):
    """Base class for instance-file problems."""


class InstanceFormatError(InstanceError):
    """The file is not parseable or is missing required structure."""


class InstanceValidationError(InstanceError):
    """The file parsed but violates a model invariant."""

    def __init__(self, diagnostics: list["Diagnostic"]):
        self.diagnostics = diagnostics
        super().__init__("; ".join(str(d) for d in diagnostics))


@dataclass(frozen=True)
class Diagnostic:
    """A single invariant violation, pointing at the offending field."""

    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.path}: {self.message}"


@dataclass(frozen=True)
class TimeGrid:
    """Contract time grid: `T` periods of `dt_hours` each.

    Energy bookkeeping is power (kW) times `dt_hours` (kWh).
    """

    T: int
    dt_hours: float = 1.0


@dataclass(frozen=True)
class GridTariff:
    """Fixed grid prices (money/kWh) and the per-building trading power cap (kW).

    The purchase price must exceed the sell-back price; the spread
    `buy - sell` is what makes shifting renewable generation valuable.
    """

    buy: float
    sell: float
    p_grid_max: float

    @property
    def spread(self) -> float:
        return self.buy - self.sell


@dataclass(frozen=True)
class StorageTech:
    """Storage technology and its per-contract-period capital prices.

    `c_e` (money/kWh/period) and `c_p` (money/kW/period) are the amortized
    capital prices used by every sizing model; build them from raw capital
    prices with :meth:`from_capital` or supply them directly in tests.
    """

    eta_ch: float
    eta_dis: float
    p_ch_max: float
    p_dis_max: float
    c_e: float
    c_p: float

    @classmethod
    def from_capital(
        cls,
        *,
        eta_ch: float,
        eta_dis: float,
        p_ch_max: float,
        p_dis_max: float,
        capex_e: float,
        capex_p: float,
        interest_rate: float,
        lifetime_years: float,
        exchange_rate: float,
        periods_per_year: int = 365,
    ) -> "StorageTech":
        """Amortize raw capital prices (pre-exchange currency) into
        per-period prices in the market currency."""
        c_e = amortize(capex_e * exchange_rate, interest_rate, lifetime_years, periods_per_year)
        c_p = amortize(capex_p * exchange_rate, interest_rate, lifetime_years, periods_per_year)
        return cls(
            eta_ch=eta_ch,
            eta_dis=eta_dis,
            p_ch_max=p_ch_max,
            p_dis_max=p_dis_max,
            c_e=c_e,
            c_p=c_p,
        )


def _readonly(values) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Scenario:
    """One representative realization: probability plus demand/renewable
    power series (kW, one entry per period)."""

    prob: float
    demand: np.ndarray
    renewable: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "demand", _readonly(self.demand))
        object.__setattr__(self, "renewable", _readonly(self.renewable))


@dataclass(frozen=True)
class BuildingProfile:
    """A consumer: named collection of demand/renewable scenarios."""

    name: str
    scenarios: tuple[Scenario, ...]

    def __post_init__(self):
        object.__setattr__(self, "scenarios", tuple(self.scenarios))


@dataclass(frozen=True)
class Instance:
    """Full market description plus derived per-building quantities.

    `r_min`/`r_max` bound the shiftable-energy request of each building and
    `baseline_bills` holds each building's bill with no storage at all.
    """

    time: TimeGrid
    tariff: GridTariff
    tech: StorageTech
    buildings: tuple[BuildingProfile, ...]
    r_min: np.ndarray = field(default=None)
    r_max: np.ndarray = field(default=None)
    baseline_bills: np.ndarray = field(default=None)
    name: str = "instance"

    @property
    def n_buildings(self) -> int:
        return len(self.buildings)

    @property
    def n_scenarios(self) -> int:
        return len(self.buildings[0].scenarios)

    def building_names(self) -> list[str]:
        return [b.name for b in self.buildings]


def amortize(
    capital_price: float,
    interest_rate: float,
    lifetime_years: float,
    periods_per_year: int,
) -> float:
    """Per-period amortized price of one capital unit.

    Uses the capital-recovery-factor annuity
    ``CRF(r, L) = r (1+r)^L / ((1+r)^L - 1)`` spread over
    `periods_per_year` periods; at zero interest the factor degrades to
    ``1/L``. Homogeneous of degree one in `capital_price`.
    """
    if interest_rate < 0:
        raise ValueError("interest_rate must be >= 0")
    if lifetime_years < 1:
        raise ValueError("lifetime_years must be >= 1")
    if periods_per_year < 1:
        raise ValueError("periods_per_year must be >= 1")
    if interest_rate == 0:
        crf = 1.0 / lifetime_years
    else:
        growth = (1.0 + interest_rate) ** lifetime_years
        crf = interest_rate * growth / (growth - 1.0)
    return capital_price * crf / periods_per_year


def max_rus(profile: BuildingProfile, grid: TimeGrid) -> float:
    """Probability-weighted surplus renewable energy (kWh) over the contract:
    the most shifting the building could ever ask for."""
    total = 0.0
    for sc in profile.scenarios:
        surplus = np.maximum(sc.renewable - sc.demand, 0.0)
        total += sc.prob * float(surplus.sum()) * grid.dt_hours
    return total


def baseline_bill(profile: BuildingProfile, tariff: GridTariff, grid: TimeGrid) -> float:
    """Expected electricity bill with no storage: buy every net deficit,
    sell every net surplus."""
    total = 0.0
    for sc in profile.scenarios:
        net = sc.demand - sc.renewable
        bought = np.maximum(net, 0.0).sum()
        sold = np.maximum(-net, 0.0).sum()
        total += sc.prob * (tariff.buy * bought - tariff.sell * sold) * grid.dt_hours
    return float(total)


def _series_diagnostics(time: TimeGrid, buildings) -> list[Diagnostic]:
    """Structural checks that must hold before derived fields can even be
    computed: per-scenario series lengths and scenario counts."""
    out: list[Diagnostic] = []
    T = time.T if isinstance(time.T, int) else 0
    n_scen = len(buildings[0].scenarios) if buildings else 0
    for i, b in enumerate(buildings):
        base = f"buildings[{i}]"
        if not b.scenarios:
            out.append(Diagnostic(f"{base}.scenarios", "at least one scenario is required"))
            continue
        if len(b.scenarios) != n_scen:
            out.append(Diagnostic(
                f"{base}.scenarios",
                f"every building needs the same scenario count, got {len(b.scenarios)} != {n_scen}",
            ))
        for w, sc in enumerate(b.scenarios):
            sbase = f"{base}.scenarios[{w}]"
            for series_name in ("demand", "renewable"):
                series = getattr(sc, series_name)
                if T and len(series) != T:
                    out.append(Diagnostic(
                        f"{sbase}.{series_name}",
                        f"expected {T} entries, got {len(series)}",
                    ))
            if len(sc.demand) != len(sc.renewable):
                out.append(Diagnostic(sbase, "demand and renewable must have equal length"))
    return out


def build_instance(
    time: TimeGrid,
    tariff: GridTariff,
    tech: StorageTech,
    buildings: list[BuildingProfile],
    r_min: list[float] | None = None,
    name: str = "instance",
) -> Instance:
    """Assemble an instance, populate derived fields, and validate it."""
    buildings = tuple(buildings)
    structural = _series_diagnostics(time, buildings)
    if structural:
        raise InstanceValidationError(structural)
    n = len(buildings)
    r_min_arr = _readonly(r_min if r_min is not None else np.zeros(n))
    r_max_arr = _readonly([max_rus(b, time) for b in buildings])
    bills = _readonly([baseline_bill(b, tariff, time) for b in buildings])
    inst = Instance(
        time=time,
        tariff=tariff,
        tech=tech,
        buildings=buildings,
        r_min=r_min_arr,
        r_max=r_max_arr,
        baseline_bills=bills,
        name=name,
    )
    diagnostics = validate_instance(inst)
    if diagnostics:
        raise InstanceValidationError(diagnostics)
    return inst


def validate_instance(inst: Instance) -> list[Diagnostic]:
    """Check every type invariant; returns one diagnostic per violation
    (empty list means the instance is sound)."""
    out: list[Diagnostic] = []

    def bad(path: str, message: str) -> None:
        out.append(Diagnostic(path, message))

    t = inst.time
    if not (isinstance(t.T, int) and t.T >= 1):
        bad("time.T", f"period count must be an integer >= 1, got {t.T!r}")
    if not t.dt_hours > 0:
        bad("time.dt_hours", f"period length must be > 0, got {t.dt_hours}")

    tr = inst.tariff
    if tr.sell < 0:
        bad("tariff.sell", f"sell price must be >= 0, got {tr.sell}")
    if not tr.buy > tr.sell:
        bad("tariff.buy", f"buy price must exceed sell price, got buy={tr.buy} sell={tr.sell}")
    if not tr.p_grid_max > 0:
        bad("tariff.p_grid_max", f"grid power limit must be > 0, got {tr.p_grid_max}")

    tech = inst.tech
    for fname in ("eta_ch", "eta_dis"):
        eta = getattr(tech, fname)
        if not (0 < eta <= 1):
            bad(f"tech.{fname}", f"efficiency must be in (0, 1], got {eta}")
    for fname in ("p_ch_max", "p_dis_max", "c_e", "c_p"):
        val = getattr(tech, fname)
        if val is None:
            bad(f"tech.{fname}", "must be populated before any model solve")
        elif val < 0:
            bad(f"tech.{fname}", f"must be >= 0, got {val}")

    if not inst.buildings:
        bad("buildings", "at least one building is required")
    out.extend(_series_diagnostics(inst.time, inst.buildings))
    ref_probs = None
    for i, b in enumerate(inst.buildings):
        base = f"buildings[{i}]"
        if not b.scenarios:
            continue
        probs = [sc.prob for sc in b.scenarios]
        if abs(sum(probs) - 1.0) > PROB_TOL:
            bad(f"{base}.scenarios", f"probabilities must sum to 1, got {sum(probs)}")
        if ref_probs is None:
            ref_probs = probs
        elif len(probs) == len(ref_probs) and any(
            abs(p - q) > PROB_TOL for p, q in zip(probs, ref_probs)
        ):
            # the shared-storage programs aggregate per scenario, so the
            # scenario weights must agree across buildings
            bad(f"{base}.scenarios", "scenario probabilities differ between buildings")
        for w, sc in enumerate(b.scenarios):
            sbase = f"{base}.scenarios[{w}]"
            if sc.prob < 0:
                bad(f"{sbase}.prob", f"probability must be >= 0, got {sc.prob}")
            for series_name in ("demand", "renewable"):
                series = getattr(sc, series_name)
                if len(series) and float(series.min()) < 0:
                    bad(f"{sbase}.{series_name}", "entries must be >= 0")

    structurally_ok = not out
    n = len(inst.buildings)
    for arr_name in ("r_min", "r_max", "baseline_bills"):
        arr = getattr(inst, arr_name)
        if arr is None or len(arr) != n:
            bad(arr_name, "derived field missing or wrong length")
            return out
    for i in range(n):
        if inst.r_min[i] < 0:
            bad(f"r_min[{i}]", f"must be >= 0, got {inst.r_min[i]}")
        if inst.r_min[i] > inst.r_max[i] + 1e-12:
            bad(f"r_min[{i}]", f"exceeds r_max ({inst.r_min[i]} > {inst.r_max[i]})")
        if structurally_ok:
            expected = max_rus(inst.buildings[i], inst.time)
            if not math.isclose(inst.r_max[i], expected, rel_tol=1e-9, abs_tol=1e-9):
                bad(f"r_max[{i}]", f"inconsistent with profile surplus {expected}")
            expected_bill = baseline_bill(inst.buildings[i], inst.tariff, inst.time)
            if not math.isclose(inst.baseline_bills[i], expected_bill, rel_tol=1e-9, abs_tol=1e-9):
                bad(f"baseline_bills[{i}]", f"inconsistent with recomputed bill {expected_bill}")
    return out


def _require(mapping: dict, key: str, where: str):
    if key not in mapping:
        raise InstanceFormatError(f"missing required key '{where}.{key}'")
    return mapping[key]


def load_instance(path: str | Path) -> Instance:
    """Load and validate a JSON instance file (schema in FORMATS.md)."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except OSError as exc:
        raise InstanceFormatError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise InstanceFormatError(f"{path}: top level must be an object")

    try:
        time_raw = _require(raw, "time", "$")
        time = TimeGrid(
            T=int(_require(time_raw, "T", "time")),
            dt_hours=float(time_raw.get("dt_hours", 1.0)),
        )
        tariff_raw = _require(raw, "tariff", "$")
        tariff = GridTariff(
            buy=float(_require(tariff_raw, "buy", "tariff")),
            sell=float(_require(tariff_raw, "sell", "tariff")),
            p_grid_max=float(_require(tariff_raw, "p_grid_max", "tariff")),
        )
        tech_raw = _require(raw, "tech", "$")
        tech = StorageTech.from_capital(
            eta_ch=float(_require(tech_raw, "eta_ch", "tech")),
            eta_dis=float(_require(tech_raw, "eta_dis", "tech")),
            p_ch_max=float(_require(tech_raw, "p_ch_max", "tech")),
            p_dis_max=float(_require(tech_raw, "p_dis_max", "tech")),
            capex_e=float(_require(tech_raw, "capex_e_eur_per_kwh", "tech")),
            capex_p=float(_require(tech_raw, "capex_p_eur_per_kw", "tech")),
            interest_rate=float(_require(tech_raw, "interest_rate", "tech")),
            lifetime_years=float(_require(tech_raw, "lifetime_years", "tech")),
            exchange_rate=float(_require(tech_raw, "exchange_rate", "tech")),
            periods_per_year=int(tech_raw.get("periods_per_year", 365)),
        )
        buildings_raw = _require(raw, "buildings", "$")
        if not isinstance(buildings_raw, list):
            raise InstanceFormatError("'buildings' must be a list")
        buildings: list[BuildingProfile] = []
        r_min: list[float] = []
        for i, b in enumerate(buildings_raw):
            scenarios = [
                Scenario(
                    prob=float(_require(s, "prob", f"buildings[{i}].scenarios")),
                    demand=s.get("demand", []),
                    renewable=s.get("renewable", []),
                )
                for s in _require(b, "scenarios", f"buildings[{i}]")
            ]
            buildings.append(
                BuildingProfile(name=str(b.get("name", f"BC{i + 1}")), scenarios=scenarios)
            )
            r_min.append(float(b.get("r_min", 0.0)))
    except (TypeError, ValueError) as exc:
        raise InstanceFormatError(f"{path}: {exc}") from exc

    return build_instance(time, tariff, tech, buildings, r_min=r_min, name=path.stem)
