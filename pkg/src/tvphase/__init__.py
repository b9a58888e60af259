"""Phase transitions of total-variation minimization: closed-form lower
bound on the required number of Gaussian measurements, and the Monte Carlo
machinery (recovery LPs, statistical-dimension estimation) to validate it.
"""

__version__ = "0.1.0"

from .bounds import (
    BoundResult,
    cai_lower,
    cai_upper,
    failure_probability_bound,
    minimize_psi,
    phi1,
    phi2,
    psi,
    psi_limit,
    psi_terms,
    reference_bounds,
    reference_patterns,
)
from .errors import (
    DimensionError,
    ParameterError,
    PatternInfeasibleError,
    SolverFailure,
    ValidationError,
)
from .experiment import (
    CrossingEstimate,
    GridResult,
    PhaseCell,
    PhaseGridConfig,
    SparsityBound,
    TrialOutcome,
    crossing_estimate,
    isotonic_fit,
    pattern_experiment,
    run_cell,
    run_grid,
    run_trial,
)
from .patterns import (
    GradientSparseSignal,
    SupportClassification,
    VariationPattern,
    classify,
    generate_pattern_signal,
    generate_random_support_signal,
    gradient,
    pattern_from_json,
    pattern_to_json,
    read_signal_csv,
    write_signal_csv,
)
from .statdim import (
    BuCurvePoint,
    DistanceSample,
    StatdimEstimate,
    SubdiffSpec,
    bu_curve,
    clamp_term_bound,
    default_t_grid,
    estimate_Bu,
    estimate_statdim,
    project_distance,
)
from .tvsolve import (
    SolveStatus,
    SolverOptions,
    TvProblem,
    TvSolution,
    check_recovery,
    difference_matrix,
    solve_tv,
    tv_norm,
)

__all__ = [
    "__version__",
    "BoundResult",
    "BuCurvePoint",
    "CrossingEstimate",
    "DimensionError",
    "DistanceSample",
    "GradientSparseSignal",
    "GridResult",
    "ParameterError",
    "PatternInfeasibleError",
    "PhaseCell",
    "PhaseGridConfig",
    "SolveStatus",
    "SolverFailure",
    "SolverOptions",
    "SparsityBound",
    "StatdimEstimate",
    "SubdiffSpec",
    "SupportClassification",
    "TrialOutcome",
    "TvProblem",
    "TvSolution",
    "ValidationError",
    "VariationPattern",
    "bu_curve",
    "cai_lower",
    "cai_upper",
    "check_recovery",
    "clamp_term_bound",
    "classify",
    "crossing_estimate",
    "default_t_grid",
    "difference_matrix",
    "estimate_Bu",
    "estimate_statdim",
    "failure_probability_bound",
    "generate_pattern_signal",
    "generate_random_support_signal",
    "gradient",
    "isotonic_fit",
    "minimize_psi",
    "pattern_experiment",
    "pattern_from_json",
    "pattern_to_json",
    "phi1",
    "phi2",
    "project_distance",
    "psi",
    "psi_limit",
    "psi_terms",
    "read_signal_csv",
    "reference_bounds",
    "reference_patterns",
    "run_cell",
    "run_grid",
    "run_trial",
    "solve_tv",
    "tv_norm",
    "write_signal_csv",
]
