"""Soft and hard temporal clustering of mixed-type time series.

Memberships are estimated per time step by projected gradient descent
over the probability simplex, with a squared-L1 jump penalty tying
consecutive rows together; prototypes are weighted medians and modes.
"""

from .benchmark import BenchmarkReport, BenchmarkSpec, run_benchmark
from .distances import (
    distance_matrix,
    feature_ranges,
    gower_distance,
    jump_penalty_term,
    objective_value,
    squared_euclidean,
)
from .fitting import (
    FitResult,
    NumericalError,
    fit,
    initialize,
    map_labels,
    sweep_memberships,
    update_prototypes,
    weighted_median,
    weighted_mode,
)
from .metrics import (
    StateStats,
    adjusted_rand_index,
    align_and_mse,
    balanced_accuracy,
    cmeans_memberships,
    fuzzy_cmeans_oracle,
    lambda_stability_curve,
    state_conditional_stats,
)
from .simplex import SubproblemSpec, project_to_simplex, solve_subproblem, subproblem_value
from .simulate import (
    SimulatedSeries,
    SimulationConfig,
    default_centroids,
    equicorrelation_sqrt,
    sample_series,
    scenario_preset,
    simulate_latent_scores,
    softmax_mixing,
)
from .transforms import (
    TransformSpec,
    apply_transforms,
    local_extrema,
    log_return,
    relative_phase,
    rolling_std,
    sign_diff,
)
from .types import (
    GOWER,
    SQUARED_EUCLIDEAN,
    DataMatrix,
    Feature,
    FeatureRanges,
    FeatureSchema,
    FitConfig,
    PrototypeSet,
    normalize_memberships,
    validate_memberships,
)

__version__ = "0.1.0"
