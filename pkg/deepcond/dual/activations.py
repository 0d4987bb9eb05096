"""
Activation specifications and the built-in registry.

An ActivationSpec bundles the pointwise rule, its kinks (for quadrature), an
optional derivative, and the normalization constants of the underlying raw
function: sigma_normalized = (sigma_raw - centering) / scale.

Public API:
- ActivationSpec
- normalize(spec) -> ActivationSpec
- square_normalize(spec) -> ActivationSpec
- hermite_combination(coefficients, name=None) -> ActivationSpec
- get_activation(name, **params) -> ActivationSpec
- registry_names() -> list[str]
- NORMALIZED_BUILTINS, NORMRELU_DEFAULT_C
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy.stats import norm

from deepcond.errors import DomainError, UsageError
from deepcond.hermite.polynomials import hermite_table
from deepcond.hermite.quadrature import gaussian_expectation

Pointwise = Callable[[np.ndarray], np.ndarray]

NORMRELU_DEFAULT_C = -1.5975
NORMALIZATION_TOL = 1e-6

# normalized activations every lemma-level check runs over
NORMALIZED_BUILTINS = (
    "relu-normalized",
    "sign",
    "exp-normalized",
    "tanh-normalized",
    "hermite2",
    "normrelu",
)


@dataclass(frozen=True)
class ActivationSpec:
    name: str
    fn: Pointwise = field(repr=False)
    kinks: Tuple[float, ...] = ()
    derivative: Optional[Pointwise] = field(default=None, repr=False)
    centering: float = 0.0
    scale: float = 1.0
    normalized: bool = False
    closed_form_dual: Optional[Pointwise] = field(default=None, repr=False)
    closed_form_derivative: Optional[Pointwise] = field(default=None, repr=False)
    params: Tuple[Tuple[str, float], ...] = ()

    def evaluate(self, x) -> np.ndarray:
        return self.fn(np.asarray(x, dtype=float))

    def differentiate(self, x, h: float = 1e-5) -> np.ndarray:
        """sigma'(x); central differences when no derivative is registered."""
        x = np.asarray(x, dtype=float)
        if self.derivative is not None:
            return self.derivative(x)
        return (self.fn(x + h) - self.fn(x - h)) / (2.0 * h)

    def moments(self) -> Tuple[float, float]:
        """(E[sigma(X)], E[sigma(X)^2]) under the standard Gaussian."""
        mean = gaussian_expectation(self.fn, kinks=self.kinks)
        second = gaussian_expectation(lambda x: self.fn(x) ** 2, kinks=self.kinks)
        return mean, second


# ==================================
# Builders
# ==================================
def _affine_image(spec: ActivationSpec, shift: float, factor: float, name: str, normalized: bool) -> ActivationSpec:
    """(sigma - shift) / factor, with duals transformed accordingly."""
    fn, der = spec.fn, spec.derivative
    dual, dual_der = spec.closed_form_dual, spec.closed_form_derivative
    f2 = factor * factor
    return replace(
        spec,
        name=name,
        fn=lambda x: (fn(x) - shift) / factor,
        derivative=None if der is None else (lambda x: der(x) / factor),
        closed_form_dual=None if dual is None else (lambda r: (dual(r) - shift * shift) / f2),
        closed_form_derivative=None if dual_der is None else (lambda r: dual_der(r) / f2),
        normalized=normalized,
    )


def normalize(spec: ActivationSpec, name: Optional[str] = None) -> ActivationSpec:
    """Centered, unit-second-moment version of `spec` (returns `spec` itself if already normalized)."""
    if spec.normalized:
        return spec
    mean, second = spec.moments()
    var = second - mean * mean
    if var <= 1e-14:
        raise DomainError(f"activation {spec.name!r} is constant under N(0,1)", {"variance": var})
    s = math.sqrt(var)
    out = _affine_image(spec, mean, s, name or f"{spec.name}-normalized", True)
    return replace(out, centering=mean, scale=s)


def square_normalize(spec: ActivationSpec, name: Optional[str] = None) -> ActivationSpec:
    """Rescale so that E[sigma^2] = 1 without centering."""
    _, second = spec.moments()
    if second <= 1e-14:
        raise DomainError(f"activation {spec.name!r} vanishes under N(0,1)")
    return _affine_image(spec, 0.0, math.sqrt(second), name or f"{spec.name}-square", False)


def hermite_combination(coefficients, name: Optional[str] = None) -> ActivationSpec:
    """sigma = sum_i c_i h_i with the exact dual sum_i c_i^2 rho^i."""
    c = np.asarray(coefficients, dtype=float)
    if c.ndim != 1 or c.size == 0:
        raise DomainError("coefficients must be a non-empty vector")
    degree = c.size - 1
    squares = c * c
    orders = np.arange(c.size)

    def fn(x):
        x = np.asarray(x, dtype=float)
        return (c @ hermite_table(degree, x)).reshape(x.shape)

    def derivative(x):
        # h_i' = sqrt(i) h_{i-1}
        x = np.asarray(x, dtype=float)
        if degree == 0:
            return np.zeros_like(x)
        shifted = c[1:] * np.sqrt(orders[1:])
        return (shifted @ hermite_table(degree - 1, x)).reshape(x.shape)

    mean = float(c[0])
    second = float(squares.sum())
    return ActivationSpec(
        name=name or "hermite[" + ",".join(f"{v:g}" for v in c) + "]",
        fn=fn,
        derivative=derivative,
        centering=mean,
        scale=math.sqrt(max(second - mean * mean, 0.0)),
        normalized=abs(mean) <= NORMALIZATION_TOL and abs(second - 1.0) <= NORMALIZATION_TOL,
        closed_form_dual=lambda r: np.polynomial.polynomial.polyval(r, squares),
        closed_form_derivative=lambda r: np.polynomial.polynomial.polyval(r, squares[1:] * orders[1:]),
    )


# ==================================
# Closed forms
# ==================================
_SQRT_2PI = math.sqrt(2.0 * math.pi)
_E = math.e


def _relu(x):
    return np.maximum(x, 0.0)


def _heaviside(x):
    return (x >= 0).astype(float)


def _relu_dual(r):
    r = np.clip(r, -1.0, 1.0)
    return (np.sqrt(1.0 - r * r) + (math.pi - np.arccos(r)) * r) / (2.0 * math.pi)


def _step_dual(r):
    r = np.clip(r, -1.0, 1.0)
    return (math.pi - np.arccos(r)) / (2.0 * math.pi)


def _step_dual_derivative(r):
    r = np.clip(r, -1.0, 1.0)
    with np.errstate(divide="ignore"):
        return 1.0 / (2.0 * math.pi * np.sqrt(1.0 - r * r))


def _identity() -> ActivationSpec:
    return ActivationSpec(
        name="identity",
        fn=lambda x: x.copy(),
        derivative=np.ones_like,
        normalized=True,
        closed_form_dual=lambda r: np.asarray(r, dtype=float),
        closed_form_derivative=lambda r: np.ones_like(np.asarray(r, dtype=float)),
    )


def _relu_spec() -> ActivationSpec:
    mean = 1.0 / _SQRT_2PI
    return ActivationSpec(
        name="relu",
        fn=_relu,
        kinks=(0.0,),
        derivative=lambda x: (x > 0).astype(float),
        centering=mean,
        scale=math.sqrt(0.5 - mean * mean),
        closed_form_dual=_relu_dual,
        closed_form_derivative=_step_dual,
    )


def _step_spec() -> ActivationSpec:
    return ActivationSpec(
        name="step",
        fn=_heaviside,
        kinks=(0.0,),
        derivative=np.zeros_like,
        centering=0.5,
        scale=0.5,
        closed_form_dual=_step_dual,
        closed_form_derivative=_step_dual_derivative,
    )


def _exp_spec() -> ActivationSpec:
    # E[e^X e^Y] = e^(1 + rho) for corr(X, Y) = rho
    return ActivationSpec(
        name="exp",
        fn=np.exp,
        derivative=np.exp,
        centering=math.sqrt(_E),
        scale=math.sqrt(_E * _E - _E),
        closed_form_dual=lambda r: np.exp(1.0 + np.asarray(r, dtype=float)),
        closed_form_derivative=lambda r: np.exp(1.0 + np.asarray(r, dtype=float)),
    )


def _normalized_from_constants(spec: ActivationSpec, name: str) -> ActivationSpec:
    return _affine_image(spec, spec.centering, spec.scale, name, True)


def _sign_spec() -> ActivationSpec:
    return ActivationSpec(
        name="sign",
        fn=lambda x: np.where(x >= 0, 1.0, -1.0),
        kinks=(0.0,),
        derivative=np.zeros_like,
        centering=0.5,
        scale=0.5,
        normalized=True,
        closed_form_dual=lambda r: (2.0 / math.pi) * np.arcsin(np.clip(r, -1.0, 1.0)),
        closed_form_derivative=lambda r: 4.0 * _step_dual_derivative(r),
    )


def _hermite2_spec() -> ActivationSpec:
    spec = hermite_combination([0.0, 0.0, 1.0], name="hermite2")
    return replace(spec, normalized=True)


def _tanh_spec() -> ActivationSpec:
    raw = ActivationSpec(name="tanh", fn=np.tanh, derivative=lambda x: 1.0 - np.tanh(x) ** 2)
    return normalize(raw, name="tanh-normalized")


def _selu_spec() -> ActivationSpec:
    alpha, lam = 1.6732632423543772, 1.0507009873554805
    raw = ActivationSpec(
        name="selu",
        fn=lambda x: lam * np.where(x > 0, x, alpha * np.expm1(np.minimum(x, 0.0))),
        kinks=(0.0,),
        derivative=lambda x: lam * np.where(x > 0, 1.0, alpha * np.exp(np.minimum(x, 0.0))),
    )
    return normalize(raw, name="selu-shape")


def normrelu_spec(c: float = NORMRELU_DEFAULT_C) -> ActivationSpec:
    """lambda(c) * (max(u - c, 0) + b(c)), normalized by construction."""
    if not -10.0 <= c <= 10.0:
        raise DomainError("NormReLU shift must lie in [-10, 10]", {"c": c})
    cdf, pdf = float(norm.cdf(c)), float(norm.pdf(c))
    tail = 1.0 - cdf
    b = tail * c - pdf
    lam = (tail * cdf * c * c + (1.0 - 2.0 * cdf) * pdf * c + (tail - pdf * pdf)) ** -0.5
    return ActivationSpec(
        name="normrelu",
        fn=lambda x: lam * (np.maximum(x - c, 0.0) + b),
        kinks=(float(c),),
        derivative=lambda x: lam * (x > c).astype(float),
        centering=-b,
        scale=1.0 / lam,
        normalized=True,
        params=(("c", float(c)),),
    )


_REGISTRY: Dict[str, Callable[..., ActivationSpec]] = {
    "identity": _identity,
    "relu": _relu_spec,
    "relu-normalized": lambda: _normalized_from_constants(_relu_spec(), "relu-normalized"),
    "step": _step_spec,
    "step-square": lambda: replace(
        _affine_image(_step_spec(), 0.0, math.sqrt(0.5), "step-square", False), centering=0.5, scale=0.5
    ),
    "sign": _sign_spec,
    "exp": _exp_spec,
    "exp-normalized": lambda: _normalized_from_constants(_exp_spec(), "exp-normalized"),
    "tanh-normalized": _tanh_spec,
    "hermite2": _hermite2_spec,
    "normrelu": normrelu_spec,
    "selu-shape": _selu_spec,
}

_BUILD_LOCK = threading.RLock()


def registry_names() -> List[str]:
    return sorted(_REGISTRY)


def get_activation(name: str, **params: float) -> ActivationSpec:
    """Built-in activation by name; repeated lookups return the same object."""
    if name not in _REGISTRY:
        raise UsageError(f"unknown activation {name!r}", {"registry": registry_names()})
    with _BUILD_LOCK:
        return _build_activation(name, tuple(sorted(params.items())))


@lru_cache(maxsize=128)
def _build_activation(name: str, params: Tuple[Tuple[str, float], ...]) -> ActivationSpec:
    try:
        return _REGISTRY[name](**dict(params))
    except TypeError as exc:
        raise UsageError(f"activation {name!r} does not take parameters {sorted(dict(params))}") from exc
