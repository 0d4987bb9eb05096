"""
Hermite expansion of a scalar activation under N(0, gamma).

a_j^gamma = E_{z ~ N(0, gamma)}[sigma(z) h_j^gamma(z)] = E_X[sigma(sqrt(gamma) X) h_j(X)].

Public API:
- HermiteExpansion
- expand(activation, degree=60, gamma=1.0, rule=None) -> HermiteExpansion
- reconstruct(expansion, x) -> ndarray
- DEFAULT_DEGREE, DEFAULT_ORDER
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, Sequence

import numpy as np

from deepcond.errors import DomainError, NumericalError
from deepcond.hermite.polynomials import hermite_table
from deepcond.hermite.quadrature import QuadratureRule, default_rule

DEFAULT_DEGREE = 60
DEFAULT_ORDER = 128


class Expandable(Protocol):
    name: str
    kinks: Sequence[float]

    def evaluate(self, x: np.ndarray) -> np.ndarray: ...


@dataclass(frozen=True, eq=False)
class HermiteExpansion:
    coefficients: np.ndarray
    degree: int
    tail_mass: float
    base_variance: float = 1.0
    second_moment: float = 1.0

    @property
    def squared(self) -> np.ndarray:
        return self.coefficients ** 2


def expand(activation: Expandable, degree: int = DEFAULT_DEGREE, gamma: float = 1.0,
           rule: QuadratureRule | None = None) -> HermiteExpansion:
    if not gamma > 0:
        raise DomainError("base variance gamma must be positive", {"gamma": gamma})
    rule = rule or default_rule(activation.kinks, gamma, DEFAULT_ORDER)
    if rule.order < 2 * degree:
        raise DomainError("quadrature order too low for the requested degree",
                          {"order": rule.order, "degree": degree})
    values = np.asarray(activation.evaluate(np.sqrt(gamma) * rule.nodes), dtype=float)
    if not np.all(np.isfinite(values)):
        raise NumericalError(f"activation {activation.name!r} is not finite at a quadrature node",
                             {"gamma": gamma})
    weighted = rule.weights * values
    coefficients = hermite_table(degree, rule.nodes) @ weighted
    second = float(np.dot(weighted, values))
    tail = max(0.0, second - float(np.sum(coefficients ** 2)))
    coefficients.setflags(write=False)
    return HermiteExpansion(coefficients, degree, tail, float(gamma), second)


def reconstruct(expansion: HermiteExpansion, x) -> np.ndarray:
    """Truncated series sum_i a_i h_i^gamma(x)."""
    table = hermite_table(expansion.degree, x, expansion.base_variance)
    return expansion.coefficients @ table
