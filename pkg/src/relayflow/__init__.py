"""relayflow: relay placement for multi-agent teams by shadow-price ascent.

The team utility of an agent configuration is the optimal value of a
multi-commodity flow problem whose edge capacities decay with
inter-agent distance.  Solving that problem also yields the shadow
prices of the capacity constraints, which assemble into a direction of
local increase of the utility with respect to the relay positions.
This package provides the capacity model, the flow LP with full dual
extraction, the ascent loop, a mobile-team simulator, and a CLI for
reproducible experiments.
"""

from .ascent import (
    AscentConfig,
    AscentError,
    AscentRecord,
    AscentTrace,
    ascend,
    finite_difference_phi,
    gradient_from_duals,
    team_utility,
)
from .capacity import (
    CapacityModel,
    capacity,
    capacity_gradient,
    capacity_matrix,
    gradient_factor_matrix,
)
from .dynamics import (
    MotionConfig,
    SimState,
    SimTimeline,
    SimulationError,
    run_simulation,
    step_relay,
    step_task,
)
from .lp import (
    KktReport,
    LpResult,
    SolverOptions,
    StandardFormLP,
    check_kkt,
    scipy_linprog_solve,
    solve,
    solve_interior_point,
)
from .mcfp import (
    FlowSolution,
    McfpInstance,
    McfpSolveError,
    VerificationReport,
    build_instance,
    build_lp,
    flow_solution_to_dict,
    solve_mcfp,
    verify_solution,
)
from .network import (
    CommoditySpec,
    Scenario,
    ScenarioConfig,
    ScenarioFormatError,
    area_side,
    default_commodities,
    load_scenario,
    save_scenario,
    spawn_scenario,
    weight_preset,
)

__version__ = "0.1.0"

__all__ = [
    "AscentConfig",
    "AscentError",
    "AscentRecord",
    "AscentTrace",
    "CapacityModel",
    "CommoditySpec",
    "FlowSolution",
    "KktReport",
    "LpResult",
    "McfpInstance",
    "McfpSolveError",
    "MotionConfig",
    "Scenario",
    "ScenarioConfig",
    "ScenarioFormatError",
    "SimState",
    "SimTimeline",
    "SimulationError",
    "SolverOptions",
    "StandardFormLP",
    "VerificationReport",
    "area_side",
    "ascend",
    "build_instance",
    "build_lp",
    "capacity",
    "capacity_gradient",
    "capacity_matrix",
    "check_kkt",
    "default_commodities",
    "finite_difference_phi",
    "flow_solution_to_dict",
    "gradient_factor_matrix",
    "gradient_from_duals",
    "load_scenario",
    "run_simulation",
    "save_scenario",
    "scipy_linprog_solve",
    "solve",
    "solve_interior_point",
    "solve_mcfp",
    "spawn_scenario",
    "step_relay",
    "step_task",
    "team_utility",
    "verify_solution",
    "weight_preset",
    "__version__",
]
