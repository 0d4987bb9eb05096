"""
Dual activations: sigma_hat(rho) = sum_i a_i^2 rho^i and its derivative.

Closed forms are used when the activation registers one; otherwise the
truncated series is evaluated by Horner's scheme with the unresolved tail
mass folded onto the first parity-compatible degree above the truncation,
so that sigma_hat(1) = E[sigma^2] holds exactly.

Public API:
- DualActivation, FixedPoint
- dual_activation(spec, degree=60, rule=None) -> DualActivation
- dual_eval(d, rho, use_closed_form=True)
- dual_derivative_eval(d, rho, use_closed_form=True)
- series_uncertainty(d, rho)
- coefficient_of_nonlinearity(d) -> float
- coefficient_of_nonaffinity(d) -> float
- fixed_point(d) -> FixedPoint
- compose(d, rho, depth) -> ndarray
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.optimize import bisect

from deepcond.dual.activations import ActivationSpec
from deepcond.errors import DomainError, NumericalError, PreconditionError
from deepcond.hermite.expansion import DEFAULT_DEGREE, expand
from deepcond.hermite.quadrature import QuadratureRule, gaussian_expectation

log = logging.getLogger("deepcond.dual")

RHO_TOL = 1e-9
LINEAR_TOL = 1e-10
UNIT_TOL = 1e-6
FIXED_POINT_XTOL = 1e-12
FIXED_POINT_UPPER = 1.0 - 1e-9
# sigma_hat(rho) - rho near 1 is below float resolution when sigma_hat'(1) = 1
GAP_TOL = 1e-14


@dataclass(frozen=True, eq=False)
class DualActivation:
    name: str
    squared: np.ndarray
    tail_mass: float
    second_moment: float
    mu: float
    mu_tilde: float
    linear: bool
    derivative_at_one: float
    tail_degree: int
    derivative_tail: float
    closed_form: Optional[object] = None
    closed_form_derivative: Optional[object] = None
    source: Optional[ActivationSpec] = None

    @property
    def degree(self) -> int:
        return self.squared.size - 1


@dataclass(frozen=True)
class FixedPoint:
    rho_bar: float
    derivative: float


def tail_degree(squared: np.ndarray) -> int:
    """First degree above N that matches the series parity (N+1 for mixed series)."""
    n = squared.size - 1
    total = float(squared.sum())
    even, odd = float(squared[0::2].sum()), float(squared[1::2].sum())
    if total > 0 and even <= 1e-12 * total:
        want = 1
    elif total > 0 and odd <= 1e-12 * total:
        want = 0
    else:
        return n + 1
    return n + 1 if (n + 1) % 2 == want else n + 2


@lru_cache(maxsize=128)
def _cached_dual(spec: ActivationSpec, degree: int) -> "DualActivation":
    return _build(spec, degree, None)


def dual_activation(spec: ActivationSpec, degree: int = DEFAULT_DEGREE,
                    rule: QuadratureRule | None = None) -> DualActivation:
    if rule is None:
        return _cached_dual(spec, degree)
    return _build(spec, degree, rule)


def _build(spec: ActivationSpec, degree: int, rule: QuadratureRule | None) -> DualActivation:
    expansion = expand(spec, degree, 1.0, rule)
    b = expansion.squared.copy()
    b.setflags(write=False)
    second = expansion.second_moment
    tail = expansion.tail_mass
    nonlinear_mass = tail + float(b[2:].sum())
    linear = nonlinear_mass <= LINEAR_TOL
    if linear:
        mu = 0.0
    else:
        mu = 1.0 - float(b[1]) / (second - float(b[0]))
    mu_tilde = 1.0 - float(b[0]) - float(b[1])

    orders = np.arange(b.size)
    series_slope = float(np.dot(orders, b))
    if spec.closed_form_derivative is not None:
        d_one = float(spec.closed_form_derivative(np.array(1.0)))
    elif spec.derivative is not None:
        # sigma_hat'(1) = E[sigma'(X)^2]
        der = spec.derivative
        d_one = gaussian_expectation(lambda x: der(x) ** 2, kinks=spec.kinks)
    else:
        d_one = series_slope
    d_tail = max(0.0, d_one - series_slope) if np.isfinite(d_one) else 0.0
    if linear:
        log.debug("activation %s is linear (nonlinear mass %.3e)", spec.name, nonlinear_mass)
    return DualActivation(
        name=spec.name,
        squared=b,
        tail_mass=tail,
        second_moment=second,
        mu=mu,
        mu_tilde=mu_tilde,
        linear=linear,
        derivative_at_one=d_one,
        tail_degree=tail_degree(b),
        derivative_tail=d_tail,
        closed_form=spec.closed_form_dual,
        closed_form_derivative=spec.closed_form_derivative,
        source=spec,
    )


def _checked_rho(rho) -> np.ndarray:
    r = np.asarray(rho, dtype=float)
    if np.any(np.abs(r) > 1.0 + RHO_TOL) or not np.all(np.isfinite(r)):
        raise DomainError("correlation outside [-1, 1]", {"max_abs": float(np.max(np.abs(r)))})
    return np.clip(r, -1.0, 1.0)


def _shape(out: np.ndarray, like):
    return float(out) if np.ndim(like) == 0 else out


def dual_eval(d: DualActivation, rho, use_closed_form: bool = True):
    r = _checked_rho(rho)
    if use_closed_form and d.closed_form is not None:
        return _shape(np.asarray(d.closed_form(r), dtype=float), rho)
    out = P.polyval(r, d.squared) + d.tail_mass * r ** d.tail_degree
    return _shape(out, rho)


def dual_derivative_eval(d: DualActivation, rho, use_closed_form: bool = True):
    r = _checked_rho(rho)
    if use_closed_form and d.closed_form_derivative is not None:
        return _shape(np.asarray(d.closed_form_derivative(r), dtype=float), rho)
    orders = np.arange(1, d.squared.size)
    out = P.polyval(r, d.squared[1:] * orders) + d.derivative_tail * r ** (d.tail_degree - 1)
    return _shape(out, rho)


def series_uncertainty(d: DualActivation, rho):
    """Bound on the truncated-series error: tailMass * |rho|^(N+1)."""
    r = np.abs(_checked_rho(rho))
    return _shape(d.tail_mass * r ** (d.degree + 1), rho)


def coefficient_of_nonlinearity(d: DualActivation) -> float:
    """1 - sigma_hat'(0) / (sigma_hat(1) - sigma_hat(0)); 0 with d.linear for linear activations."""
    return d.mu


def coefficient_of_nonaffinity(d: DualActivation) -> float:
    return d.mu_tilde


def compose(d: DualActivation, rho, depth: int) -> np.ndarray:
    """Rows sigma_hat^(l)(rho) for l = 0..depth."""
    if depth < 0:
        raise DomainError("depth must be non-negative", {"depth": depth})
    r = np.atleast_1d(_checked_rho(rho)).astype(float)
    rows = [r]
    for _ in range(depth):
        r = np.clip(np.asarray(dual_eval(d, np.clip(r, -1.0, 1.0)), dtype=float), -1.0, 1.0)
        rows.append(r)
    return np.vstack(rows)


def fixed_point(d: DualActivation) -> FixedPoint:
    """Smallest rho_bar in [0, 1] with sigma_hat(rho_bar) = rho_bar."""
    if d.mu_tilde <= LINEAR_TOL:
        raise DomainError(f"activation {d.name!r} is affine: every correlation is fixed",
                          {"mu_tilde": d.mu_tilde})
    at_one = dual_eval(d, 1.0)
    if abs(at_one - 1.0) > UNIT_TOL:
        raise PreconditionError("fixed points need a square-normalized activation",
                                {"sigma_hat_one": at_one})
    at_zero = dual_eval(d, 0.0)
    if at_zero <= 1e-12:
        return FixedPoint(0.0, float(dual_derivative_eval(d, 0.0)))

    def gap(r: float) -> float:
        return dual_eval(d, r) - r

    if gap(FIXED_POINT_UPPER) >= -GAP_TOL:
        return FixedPoint(1.0, float(dual_derivative_eval(d, 1.0)))
    rho_bar = float(bisect(gap, 0.0, FIXED_POINT_UPPER, xtol=FIXED_POINT_XTOL, maxiter=200))
    slope = float(dual_derivative_eval(d, rho_bar))
    if slope >= 1.0:
        raise NumericalError("derivative at an interior fixed point is not below 1",
                             {"rho_bar": rho_bar, "derivative": slope})
    return FixedPoint(rho_bar, slope)
