from .bounds import (
    BoundParams,
    l0_threshold,
    bound_B,
    depth_thresholds,
    top_layer_kappa_bound,
    top_layer_kappa_bound_stronger,
    ntk_offdiag_bound,
    ntk_lambda_min_bound,
    ntk_kappa_bound,
    ntk_kappa_bound_stronger,
)
from .kernels import (
    GramMatrix,
    gram_from_inputs,
    propagate_kernel,
    propagate_trace,
    compose_values,
    ntk_matrix,
    ntk_diagonal,
    NtkSeries,
    Spectrum,
    spectrum,
    eigen_lb_check,
    separation_delta,
    nonsingularity_delta,
    gershgorin_check,
    hadamard_psd_check,
)
from .profiles import DepthRecord, DepthProfile, verify_top_layer, verify_ntk, PROFILE_COLUMNS
from .general import (
    NormPropagation,
    general_norm_propagate,
    UncenteredConvergence,
    uncentered_convergence,
    NormReluBound,
    normrelu_correlation_bound,
)
from .synthetic import synthetic_unit_inputs, random_unit_diagonal_psd

__all__ = [
    "BoundParams",
    "l0_threshold",
    "bound_B",
    "depth_thresholds",
    "top_layer_kappa_bound",
    "top_layer_kappa_bound_stronger",
    "ntk_offdiag_bound",
    "ntk_lambda_min_bound",
    "ntk_kappa_bound",
    "ntk_kappa_bound_stronger",
    "GramMatrix",
    "gram_from_inputs",
    "propagate_kernel",
    "propagate_trace",
    "compose_values",
    "ntk_matrix",
    "ntk_diagonal",
    "NtkSeries",
    "Spectrum",
    "spectrum",
    "eigen_lb_check",
    "separation_delta",
    "nonsingularity_delta",
    "gershgorin_check",
    "hadamard_psd_check",
    "DepthRecord",
    "DepthProfile",
    "verify_top_layer",
    "verify_ntk",
    "PROFILE_COLUMNS",
    "NormPropagation",
    "general_norm_propagate",
    "UncenteredConvergence",
    "uncentered_convergence",
    "NormReluBound",
    "normrelu_correlation_bound",
    "synthetic_unit_inputs",
    "random_unit_diagonal_psd",
]
