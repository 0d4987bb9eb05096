from .activations import (
    ActivationSpec,
    normalize,
    square_normalize,
    hermite_combination,
    normrelu_spec,
    get_activation,
    registry_names,
    NORMALIZED_BUILTINS,
    NORMRELU_DEFAULT_C,
)
from .duals import (
    DualActivation,
    FixedPoint,
    dual_activation,
    dual_eval,
    dual_derivative_eval,
    series_uncertainty,
    coefficient_of_nonlinearity,
    coefficient_of_nonaffinity,
    fixed_point,
    compose,
)
from .norms import (
    NormTransferMap,
    norm_transfer,
    check_activation_hypotheses,
    generalized_expansion,
    dot_product_map,
    dot_product_quadrature,
)
from .normrelu import (
    NormReluConstants,
    NormReluTheoremConstants,
    normrelu_constants,
    normrelu_a0,
    normrelu_norm,
    normrelu_norm_derivative,
    normrelu_bias,
    normrelu_theorem_constants,
)
from .checks import (
    check_convexity,
    check_oddness_bound,
    check_one_layer_contraction,
    check_dot_ratio,
    check_uncentered_one_layer,
    check_norm_concavity,
    check_norm_contraction,
    check_dot_product_monotonicity,
)

__all__ = [
    "ActivationSpec",
    "normalize",
    "square_normalize",
    "hermite_combination",
    "normrelu_spec",
    "get_activation",
    "registry_names",
    "NORMALIZED_BUILTINS",
    "NORMRELU_DEFAULT_C",
    "DualActivation",
    "FixedPoint",
    "dual_activation",
    "dual_eval",
    "dual_derivative_eval",
    "series_uncertainty",
    "coefficient_of_nonlinearity",
    "coefficient_of_nonaffinity",
    "fixed_point",
    "compose",
    "NormTransferMap",
    "norm_transfer",
    "check_activation_hypotheses",
    "generalized_expansion",
    "dot_product_map",
    "dot_product_quadrature",
    "NormReluConstants",
    "NormReluTheoremConstants",
    "normrelu_constants",
    "normrelu_a0",
    "normrelu_norm",
    "normrelu_norm_derivative",
    "normrelu_bias",
    "normrelu_theorem_constants",
    "check_convexity",
    "check_oddness_bound",
    "check_one_layer_contraction",
    "check_dot_ratio",
    "check_uncentered_one_layer",
    "check_norm_concavity",
    "check_norm_contraction",
    "check_dot_product_monotonicity",
]
