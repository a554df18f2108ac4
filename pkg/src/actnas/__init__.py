"""Per-layer activation assignment search under latency, accuracy, and
memory budgets: benchmark delta tables, a training-free accuracy proxy,
synthetic device profiles, four search strategies, and a report generator.
"""

from .activations import (
    CANDIDATE_ORDER,
    COLUMN_INDEX,
    DEFAULT_LEAKY_SLOPE,
    ActivationKind,
    eval_activation,
    parse_activation,
)
from .devices import (
    DeviceProfile,
    MeasurementConfig,
    builtin_profile,
    builtin_profile_names,
    load_profile,
    save_profile,
    simulate_latency,
    simulate_memory,
)
from .errors import ActNasError, ConfigError, EstimatorError, NoFeasibleSolutionError
from .model import (
    LayerKind,
    LayerSpec,
    ModelSpec,
    apply_assignment,
    builtin_model,
    builtin_model_names,
    enumerate_single_replacements,
    load_model,
    save_model,
    stacked_conv_model,
)
from .nwot import (
    CodeMatrix,
    MiniBatch,
    NwotScore,
    accuracy_delta,
    forward_with_codes,
    hamming_kernel,
    nwot_score,
    score_model,
)
from .search import (
    Proposal,
    SearchConstraints,
    SearchResult,
    evaluate_assignment,
    exact_search,
    hamming_distance,
    lzcm_search,
    naive_assignment,
    random_search,
    read_proposals,
    write_proposals,
)
from .tables import (
    CostEntry,
    CostMatrix,
    CostTable,
    Metric,
    build_accuracy_table,
    build_latency_table,
    build_memory_table,
    build_table,
    improvement_pct,
    predicted_total,
    read_table_csv,
    table_from_matrix,
    to_matrix,
    write_table_csv,
)

__version__ = "0.1.0"

__all__ = [
    "ActNasError",
    "ActivationKind",
    "CANDIDATE_ORDER",
    "COLUMN_INDEX",
    "CodeMatrix",
    "ConfigError",
    "CostEntry",
    "CostMatrix",
    "CostTable",
    "DEFAULT_LEAKY_SLOPE",
    "DeviceProfile",
    "EstimatorError",
    "LayerKind",
    "LayerSpec",
    "MeasurementConfig",
    "Metric",
    "MiniBatch",
    "ModelSpec",
    "NoFeasibleSolutionError",
    "NwotScore",
    "Proposal",
    "SearchConstraints",
    "SearchResult",
    "accuracy_delta",
    "apply_assignment",
    "build_accuracy_table",
    "build_latency_table",
    "build_memory_table",
    "build_table",
    "builtin_model",
    "builtin_model_names",
    "builtin_profile",
    "builtin_profile_names",
    "enumerate_single_replacements",
    "eval_activation",
    "evaluate_assignment",
    "exact_search",
    "forward_with_codes",
    "hamming_distance",
    "hamming_kernel",
    "improvement_pct",
    "load_model",
    "load_profile",
    "lzcm_search",
    "naive_assignment",
    "nwot_score",
    "parse_activation",
    "predicted_total",
    "random_search",
    "read_proposals",
    "read_table_csv",
    "save_model",
    "save_profile",
    "score_model",
    "simulate_latency",
    "simulate_memory",
    "stacked_conv_model",
    "table_from_matrix",
    "to_matrix",
    "write_proposals",
    "write_table_csv",
]
