from .rng import stream, unit_rows
from .network import (
    NetworkConfig,
    NetworkSample,
    MEMORY_BUDGET,
    MAX_WIDTH,
    sample_network,
    project,
    features,
    feature_map,
    network_output,
    empirical_kernel,
    empirical_ntk,
    parameter_vector,
    replace_parameters,
    finite_difference_ntk,
    sample_layer_features,
)
from .experiments import (
    TrialSummary,
    run_trials,
    kernel_concentration,
    ntk_concentration,
    correlation_decay_experiment,
    one_layer_min_singular_experiment,
    bn_invariance_check,
    unbiasedness_check,
)

__all__ = [
    "stream",
    "unit_rows",
    "NetworkConfig",
    "NetworkSample",
    "MEMORY_BUDGET",
    "MAX_WIDTH",
    "sample_network",
    "project",
    "features",
    "feature_map",
    "network_output",
    "empirical_kernel",
    "empirical_ntk",
    "parameter_vector",
    "replace_parameters",
    "finite_difference_ntk",
    "sample_layer_features",
    "TrialSummary",
    "run_trials",
    "kernel_concentration",
    "ntk_concentration",
    "correlation_decay_experiment",
    "one_layer_min_singular_experiment",
    "bn_invariance_check",
    "unbiasedness_check",
]
