"""Warning-controlled news propagation.

Simulates how tagged copies of a news item spread through readers as a
population-size-dependent two-type branching process, computes the
limiting tagged-copy proportions, and designs the warning mechanism so
that fake news is flagged aggressively while false alarms on real news
stay within a budget.
"""

from ._backend import backend_name
from .errors import (
    ConstraintViolation,
    CurveUndefinedError,
    DegenerateSensitivityError,
    InfeasibleError,
    InputError,
    InvariantViolation,
    ModelError,
    RegimeViolation,
    UnsupportedConfiguration,
)
from .fixed_point import (
    FixedPointResult,
    PerformancePair,
    constant_warning_fraction,
    eigenvector_check,
    limit_summary,
    performance,
    solve_beta_star,
)
from .ode import OdeState, Trajectory, attractor_sweep, drift, integrate, psi_closed_form
from .optimizer import (
    DesignProblem,
    FeasibilityReport,
    OptimizationResult,
    beta_sensitivities,
    constraint_b,
    constraint_b_slope,
    curve_psi1_slope,
    curve_w_range,
    feasibility,
    optimize,
    sweep,
)
from .params import (
    DegreeModel,
    ModelParams,
    RegimeReport,
    ScenarioPair,
    WarningPolicy,
    beta_drift,
    check_tag_probabilities,
    generator_matrix,
    load_scenario,
    tag_prob,
    validate_regime,
    warning_level,
)
from .network import (
    DegreeStats,
    SocialGraph,
    degree_stats,
    load_cache,
    load_edge_list,
    network_simulate,
    save_cache,
    subsample,
)
from .simulate import (
    CoupledTraces,
    EmbeddedChain,
    MonteCarloSummary,
    SimulationTrace,
    StopRule,
    coupled_simulate,
    embedded_chain_stats,
    monte_carlo,
    proportional_init,
    simulate,
)

__version__ = "0.1.0"
