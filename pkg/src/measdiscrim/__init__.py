"""Optimal discrimination of a pair of projective qubit measurements.

Closed-form trade-off curves between success and inconclusive rates for
entangled and single-qubit probes, numerical re-derivations of both, and a
Monte Carlo model of the bench experiment.
"""

__version__ = "0.1.0"

from .errors import (
    BranchCrossingError,
    ConvergenceError,
    DomainError,
    SingularityError,
    ValidationError,
)
from .geometry import (
    FilterOperator,
    MeasurementPair,
    PureQubitState,
    apply_filter,
    apply_sigma_y,
    filter_for_budget,
    measurement_pair,
    overlap,
)
from .strategies import (
    CurveTable,
    HullReport,
    SingleQubitStrategy,
    StrategyPoint,
    advantage,
    boundary_PIB,
    concave_branch,
    entangled_success,
    helstrom_point,
    hull_verify,
    relative_success,
    single_optimal,
    single_pure_curve,
    tangent_PIT,
    unambiguous_points,
)
from .convexity import (
    DerivativeBundle,
    concave_second_derivative,
    finite_difference_check,
    second_derivative,
    y_root,
)
from .oracle import (
    MeasurementOperatorPair,
    OracleResult,
    PovmTriple,
    TesterComponent,
    TesterTriple,
    brute_force_single,
    covariant_blocks,
    optimize_povm,
    reduced_probabilities,
    symmetrize,
    tester_probabilities,
)
from .simulator import (
    CoincidenceCounts,
    EstimateResult,
    ExperimentConfig,
    ImperfectionModel,
    estimate,
    load_imperfections,
    run_trials,
    scan_intermediate,
    scan_unambiguous,
)

__all__ = [
    "__version__",
    "BranchCrossingError",
    "ConvergenceError",
    "DomainError",
    "SingularityError",
    "ValidationError",
    "FilterOperator",
    "MeasurementPair",
    "PureQubitState",
    "apply_filter",
    "apply_sigma_y",
    "filter_for_budget",
    "measurement_pair",
    "overlap",
    "CurveTable",
    "HullReport",
    "SingleQubitStrategy",
    "StrategyPoint",
    "advantage",
    "boundary_PIB",
    "concave_branch",
    "entangled_success",
    "helstrom_point",
    "hull_verify",
    "relative_success",
    "single_optimal",
    "single_pure_curve",
    "tangent_PIT",
    "unambiguous_points",
    "DerivativeBundle",
    "concave_second_derivative",
    "finite_difference_check",
    "second_derivative",
    "y_root",
    "MeasurementOperatorPair",
    "OracleResult",
    "PovmTriple",
    "TesterComponent",
    "TesterTriple",
    "brute_force_single",
    "covariant_blocks",
    "optimize_povm",
    "reduced_probabilities",
    "symmetrize",
    "tester_probabilities",
    "CoincidenceCounts",
    "EstimateResult",
    "ExperimentConfig",
    "ImperfectionModel",
    "estimate",
    "load_imperfections",
    "run_trials",
    "scan_intermediate",
    "scan_unambiguous",
]
