"""Equilibrium solvers for creator/platform revenue-sharing games with generative AI."""

from .model import (
    AllocationRule,
    CostModel,
    GameInstance,
    ModelParams,
    Profile,
    RuleKind,
    TrafficMode,
    allocation_shares,
    creator_utility,
    full_sharing_creator_utility,
    genai_quality,
    platform_revenue,
    traffic,
)
from .best_response import (
    DeviationResult,
    best_quality_given_sharing,
    deviation_gain,
    optimal_sharing,
    sharing_threshold,
)
from .equilibrium import (
    BoundsLedger,
    EseResult,
    SolverError,
    bounds_ledger,
    compute_x_max,
    compute_x_min,
    homogeneous_closed_form,
    solve_ese,
    solve_ese_btes,
    solve_ese_dynamics_beta,
    solve_ese_foc,
    solve_ese_mamd,
)
from .stability import (
    FseReport,
    MinStableRhoResult,
    check_fse,
    check_fse_sufficient_condition,
    min_stable_rho,
)
from .optimizer import (
    GuaranteeReport,
    Objective,
    OptimizerConfig,
    OptimizerResult,
    TheoreticalConstants,
    closed_form_rho,
    evaluate_objective,
    optimize_rho,
    theoretical_constants,
    verify_approx_guarantee,
)

__version__ = "0.1.0"
