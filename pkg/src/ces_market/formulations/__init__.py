"""Market model formulations: operator equilibrium, community optimum,
individual sizing, capacity leasing, and the no-storage baseline."""

from .builders import (
    BcIndex,
    MarketIndex,
    MissingIesInputError,
    build_bc_lease_program,
    build_bc_sizing_program,
    build_market_program,
    extract_schedule,
)
from .ies import (
    fit_quadratic,
    ies_outcome,
    solve_ies,
    solve_ies_min_capital,
    solve_ies_total,
    sweep_ies_curve,
)
from .market import (
    SolverLimitError,
    build_ces_program,
    solve_baseline,
    solve_ces,
    solve_cmes,
)
from .outcomes import (
    CES,
    CMES,
    IES,
    VES,
    WO_ES,
    CesOutcome,
    IesBcResult,
    IesResult,
    ModelOutcome,
    OperationSchedule,
    QuadraticFit,
    VesBcResult,
    VesOutcome,
    VesPricePoint,
    expected_bills,
    profile_arrays,
    schedule_residuals,
)
from .ves import default_price_grid, solve_ves_bc, ves_equilibrium

__all__ = [
    "CES",
    "CMES",
    "IES",
    "VES",
    "WO_ES",
    "BcIndex",
    "CesOutcome",
    "IesBcResult",
    "IesResult",
    "MarketIndex",
    "MissingIesInputError",
    "ModelOutcome",
    "OperationSchedule",
    "QuadraticFit",
    "SolverLimitError",
    "VesBcResult",
    "VesOutcome",
    "VesPricePoint",
    "build_bc_lease_program",
    "build_bc_sizing_program",
    "build_ces_program",
    "build_market_program",
    "default_price_grid",
    "expected_bills",
    "extract_schedule",
    "fit_quadratic",
    "ies_outcome",
    "profile_arrays",
    "schedule_residuals",
    "solve_baseline",
    "solve_ces",
    "solve_cmes",
    "solve_ies",
    "solve_ies_min_capital",
    "solve_ies_total",
    "solve_ves_bc",
    "sweep_ies_curve",
    "ves_equilibrium",
]
