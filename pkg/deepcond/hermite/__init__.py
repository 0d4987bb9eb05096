from .polynomials import hermite_value, hermite_table, MAX_DEGREE
from .quadrature import (
    QuadratureRule,
    gauss_hermite_rule,
    piecewise_gaussian_rule,
    default_rule,
    gaussian_expectation,
    pair_expectation,
    tensor_expectation_2d,
)
from .expansion import HermiteExpansion, expand, reconstruct, DEFAULT_DEGREE, DEFAULT_ORDER

__all__ = [
    "hermite_value",
    "hermite_table",
    "MAX_DEGREE",
    "QuadratureRule",
    "gauss_hermite_rule",
    "piecewise_gaussian_rule",
    "default_rule",
    "gaussian_expectation",
    "pair_expectation",
    "tensor_expectation_2d",
    "HermiteExpansion",
    "expand",
    "reconstruct",
    "DEFAULT_DEGREE",
    "DEFAULT_ORDER",
]
