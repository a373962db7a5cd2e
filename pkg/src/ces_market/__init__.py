"""Cloud energy storage sharing market toolkit.

A storage operator sells renewable-shifting service to building consumers
under a quadratic price; the equilibrium comes out of a single blended
MILP. Comparison models (no storage, individual storage, community
storage, capacity leasing) share the same instance format and solver.
"""

from .formulations import (
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
    SolverLimitError,
    VesBcResult,
    VesOutcome,
    build_ces_program,
    default_price_grid,
    expected_bills,
    fit_quadratic,
    ies_outcome,
    profile_arrays,
    schedule_residuals,
    solve_baseline,
    solve_ces,
    solve_cmes,
    solve_ies,
    solve_ies_min_capital,
    solve_ies_total,
    solve_ves_bc,
    sweep_ies_curve,
    ves_equilibrium,
)
from .game import (
    BestResponse,
    EquilibriumReport,
    UndefinedPriceError,
    equilibrium_price,
    follower_best_response,
    verify_equilibrium,
)
from .generate import generate_instance, write_instance
from .instance import (
    BuildingProfile,
    Diagnostic,
    GridTariff,
    Instance,
    InstanceError,
    InstanceFormatError,
    InstanceValidationError,
    Scenario,
    StorageTech,
    TimeGrid,
    amortize,
    baseline_bill,
    build_instance,
    load_instance,
    max_rus,
    validate_instance,
)
from .metrics import (
    AccountingError,
    SocialCostRow,
    UtilizationStats,
    consumer_incentive,
    rsc,
    social_cost,
    utilization_stats,
)
from .milp import (
    BackendUnavailableError,
    MilpModel,
    MilpSolution,
    ModelError,
    SolveParams,
    SolveStatus,
    check_solution,
    new_model,
    solve,
    solve_with_backend,
)
from .runner import RunConfig, RunResult, run

__version__ = "0.1.0"
