from .descent import (
    RegressionProblem,
    TrainRun,
    gd_top_layer,
    sgd_top_layer,
    top_layer_problem,
    kernel_problem,
    depth_helps_optimization,
    TRAIN_COLUMNS,
)
from .interpolation import (
    Interpolant,
    min_norm_interpolator,
    DATA_GENERATORS,
    generate_data,
    ExcessRisk,
    excess_risk_estimate,
    RISK_COLUMNS,
)

__all__ = [
    "RegressionProblem",
    "TrainRun",
    "gd_top_layer",
    "sgd_top_layer",
    "top_layer_problem",
    "kernel_problem",
    "depth_helps_optimization",
    "TRAIN_COLUMNS",
    "Interpolant",
    "min_norm_interpolator",
    "DATA_GENERATORS",
    "generate_data",
    "ExcessRisk",
    "excess_risk_estimate",
    "RISK_COLUMNS",
]
