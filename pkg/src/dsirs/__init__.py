"""Two-agent dispute settlement with resource sales: exact solvers, an
approximation scheme for the welfare-ratio objective, and a simulation
harness producing per-run and aggregate CSV output."""

from .adjusted_winner import ClassicAwOutcome, aw_derived_plan, classic_aw
from .errors import (
    DsirsError,
    EmptyInput,
    Infeasible,
    InstanceTooLarge,
    ValidationError,
)
from .exact import (
    EnvyFreeReport,
    Objective,
    SolveResult,
    oracle_best_plan,
    solve_awns_exact,
)
from .fptas import fptas_awns_rho
from .knapsack import knapsack_fptas, o2_split, o2_value
from .model import (
    UNSELLABLE,
    Instance,
    Plan,
    Resource,
    WelfareReport,
    derived_plan,
    instance_from_dict,
    instance_to_dict,
    load_instance,
    pinned_plan,
    validate_instance,
    welfare,
)
from .simulation import (
    MODE_PAIRS,
    ModePair,
    SweepConfig,
    UtilityMatrix,
    aggregate,
    build_dsirs_instance,
    load_utility_matrices,
    run_sweep,
    synthesize_matrices,
    write_aggregates_csv,
    write_results_csv,
    write_utility_matrices,
)

__version__ = "0.1.0"

__all__ = [
    "ClassicAwOutcome",
    "DsirsError",
    "EmptyInput",
    "EnvyFreeReport",
    "Infeasible",
    "Instance",
    "InstanceTooLarge",
    "MODE_PAIRS",
    "ModePair",
    "Objective",
    "Plan",
    "Resource",
    "SolveResult",
    "SweepConfig",
    "UNSELLABLE",
    "UtilityMatrix",
    "ValidationError",
    "WelfareReport",
    "aggregate",
    "aw_derived_plan",
    "build_dsirs_instance",
    "classic_aw",
    "derived_plan",
    "fptas_awns_rho",
    "instance_from_dict",
    "instance_to_dict",
    "knapsack_fptas",
    "load_instance",
    "load_utility_matrices",
    "o2_split",
    "o2_value",
    "oracle_best_plan",
    "pinned_plan",
    "run_sweep",
    "solve_awns_exact",
    "synthesize_matrices",
    "validate_instance",
    "welfare",
    "write_aggregates_csv",
    "write_results_csv",
    "write_utility_matrices",
]
