"""
Quadrature rules for expectations under the standard Gaussian measure.

Two rule families share one type:
- Gauss-Hermite (Golub-Welsch on the probabilist's Jacobi matrix), exact for
  polynomials of degree <= 2*order-1.
- Composite Gauss-Legendre panels on [-T, T] weighted by the Gaussian density,
  with extra breakpoints at the kinks of a non-smooth integrand. Plain
  Gauss-Hermite only converges algebraically across a kink.

Public API:
- QuadratureRule
- gauss_hermite_rule(order) -> QuadratureRule
- piecewise_gaussian_rule(breakpoints=(), ...) -> QuadratureRule
- default_rule(kinks=(), gamma=1.0) -> QuadratureRule
- gaussian_expectation(f, rule=None, gamma=1.0, kinks=()) -> float
- pair_expectation(f, g, rho, kinks_f=(), kinks_g=()) -> float
- tensor_expectation_2d(f, cov, order=48) -> float
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.linalg import eigh_tridiagonal
from scipy.stats import norm

from deepcond.errors import DomainError, NumericalError

MAX_ORDER = 512

# composite rule used for 1-D expansions
PANEL_HALF_WIDTH = 14.0
PANEL_WIDTH = 0.5
PANEL_ORDER = 20

# cheaper composite rule for the two nested levels of pair expectations
PAIR_HALF_WIDTH = 12.0
PAIR_PANEL_WIDTH = 1.0
PAIR_PANEL_ORDER = 16

# below this sqrt(1 - rho^2) the pair collapses onto one Gaussian
_DEGENERATE_SCALE = 1e-7

Integrand = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    order: int
    kind: str = "gauss-hermite"

    def expect(self, values: np.ndarray) -> float:
        return float(np.dot(self.weights, values))

    def moments(self) -> Tuple[float, float, float]:
        """(sum w, sum w x, sum w x^2); (1, 0, 1) up to rounding."""
        w, x = self.weights, self.nodes
        return float(w.sum()), float(np.dot(w, x)), float(np.dot(w, x * x))


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


@lru_cache(maxsize=64)
def gauss_hermite_rule(order: int) -> QuadratureRule:
    if not isinstance(order, (int, np.integer)) or order < 1 or order > MAX_ORDER:
        raise DomainError(f"quadrature order must be in [1, {MAX_ORDER}]", {"order": order})
    order = int(order)
    if order == 1:
        return QuadratureRule(_frozen(np.zeros(1)), _frozen(np.ones(1)), 1)
    off = np.sqrt(np.arange(1, order, dtype=float))
    try:
        nodes, vectors = eigh_tridiagonal(np.zeros(order), off)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("Golub-Welsch eigensolve failed", {"order": order, "reason": str(exc)}) from exc
    weights = vectors[0, :] ** 2
    # exact symmetry of the Gaussian rule
    nodes = 0.5 * (nodes - nodes[::-1])
    weights = 0.5 * (weights + weights[::-1])
    weights = weights / weights.sum()
    return QuadratureRule(_frozen(nodes), _frozen(weights), order)


def _panel_edges(breakpoints: Iterable[float], half_width: float, panel_width: float) -> np.ndarray:
    count = int(round(2 * half_width / panel_width))
    base = np.linspace(-half_width, half_width, count + 1)
    extra = [b for b in breakpoints if -half_width < b < half_width]
    return np.unique(np.concatenate([base, np.asarray(extra, dtype=float)]))


@lru_cache(maxsize=256)
def _piecewise_cached(breakpoints: Tuple[float, ...], half_width: float, panel_width: float,
                      panel_order: int) -> QuadratureRule:
    t, wl = leggauss(panel_order)
    edges = _panel_edges(breakpoints, half_width, panel_width)
    a, b = edges[:-1], edges[1:]
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    nodes = (mid[:, None] + half[:, None] * t[None, :]).ravel()
    weights = (half[:, None] * wl[None, :]).ravel() * norm.pdf(nodes)
    weights = weights / weights.sum()
    return QuadratureRule(_frozen(nodes), _frozen(weights), int(nodes.size), kind="piecewise")


def piecewise_gaussian_rule(breakpoints: Iterable[float] = (), half_width: float = PANEL_HALF_WIDTH,
                            panel_width: float = PANEL_WIDTH, panel_order: int = PANEL_ORDER) -> QuadratureRule:
    """Composite Gaussian rule; `order` reports the total node count."""
    if half_width <= 0 or panel_width <= 0 or panel_order < 1:
        raise DomainError("invalid composite rule parameters",
                          {"half_width": half_width, "panel_width": panel_width, "panel_order": panel_order})
    key = tuple(sorted({round(float(b), 14) for b in breakpoints}))
    return _piecewise_cached(key, float(half_width), float(panel_width), int(panel_order))


def default_rule(kinks: Iterable[float] = (), gamma: float = 1.0, order: int = 128) -> QuadratureRule:
    """Rule for E[f(sqrt(gamma) X)]: composite when f has kinks, Gauss-Hermite otherwise."""
    kinks = tuple(kinks)
    if not kinks:
        return gauss_hermite_rule(order)
    scale = np.sqrt(gamma)
    return piecewise_gaussian_rule(tuple(k / scale for k in kinks))


def gaussian_expectation(f: Integrand, rule: QuadratureRule | None = None, gamma: float = 1.0,
                         kinks: Iterable[float] = ()) -> float:
    """E[f(Z)] for Z ~ N(0, gamma)."""
    if not gamma > 0:
        raise DomainError("variance must be positive", {"gamma": gamma})
    rule = rule or default_rule(kinks, gamma)
    values = np.asarray(f(np.sqrt(gamma) * rule.nodes), dtype=float)
    if not np.all(np.isfinite(values)):
        raise NumericalError("integrand is not finite at a quadrature node", {"gamma": gamma})
    return rule.expect(values)


def pair_expectation(f: Integrand, g: Integrand, rho: float, kinks_f: Iterable[float] = (),
                     kinks_g: Iterable[float] = ()) -> float:
    """
    E[f(X) g(Y)] for standard Gaussians with corr(X, Y) = rho.

    Y = rho*X + s*Z with s = sqrt(1 - rho^2); the inner integral over Z gets
    per-row breakpoints where g's kinks fall, so the panel count stays fixed
    and the whole grid is evaluated in one vectorized pass.
    """
    if abs(rho) > 1 + 1e-9:
        raise DomainError("correlation must lie in [-1, 1]", {"rho": rho})
    rho = float(np.clip(rho, -1.0, 1.0))
    kinks_f, kinks_g = tuple(kinks_f), tuple(kinks_g)
    s = np.sqrt(max(0.0, 1.0 - rho * rho))
    if s < _DEGENERATE_SCALE:
        sign = 1.0 if rho > 0 else -1.0
        rule = piecewise_gaussian_rule(kinks_f + tuple(sign * k for k in kinks_g))
        return gaussian_expectation(lambda x: f(x) * g(sign * x), rule)

    outer = piecewise_gaussian_rule(kinks_f, PAIR_HALF_WIDTH, PAIR_PANEL_WIDTH, PAIR_PANEL_ORDER)
    x = outer.nodes
    base = _panel_edges((), PAIR_HALF_WIDTH, PAIR_PANEL_WIDTH)
    edges = np.broadcast_to(base, (x.size, base.size))
    if kinks_g:
        moving = np.stack([(k - rho * x) / s for k in kinks_g], axis=1)
        edges = np.concatenate([edges, np.clip(moving, -PAIR_HALF_WIDTH, PAIR_HALF_WIDTH)], axis=1)
    edges = np.sort(edges, axis=1)
    t, wl = leggauss(PAIR_PANEL_ORDER)
    half = 0.5 * (edges[:, 1:] - edges[:, :-1])
    mid = 0.5 * (edges[:, 1:] + edges[:, :-1])
    z = (mid[..., None] + half[..., None] * t).reshape(x.size, -1)
    w = (half[..., None] * wl).reshape(x.size, -1) * norm.pdf(z)
    w = w / w.sum(axis=1, keepdims=True)
    inner = np.sum(w * np.asarray(g(rho * x[:, None] + s * z), dtype=float), axis=1)
    total = outer.expect(np.asarray(f(x), dtype=float) * inner)
    if not np.isfinite(total):
        raise NumericalError("pair expectation is not finite", {"rho": rho})
    return float(total)


def tensor_expectation_2d(f: Callable[[np.ndarray, np.ndarray], np.ndarray], cov, order: int = 48) -> float:
    """E[f(Z1, Z2)] for (Z1, Z2) ~ N(0, cov) by a tensor Gauss-Hermite rule."""
    cov = np.asarray(cov, dtype=float)
    if cov.shape != (2, 2) or not np.allclose(cov, cov.T):
        raise DomainError("covariance must be a symmetric 2x2 matrix")
    evals, evecs = np.linalg.eigh(cov)
    if evals[0] < -1e-12 * max(1.0, evals[1]):
        raise DomainError("covariance must be positive semidefinite", {"eigenvalues": evals.tolist()})
    factor = evecs * np.sqrt(np.clip(evals, 0.0, None))
    rule = gauss_hermite_rule(order)
    u1, u2 = np.meshgrid(rule.nodes, rule.nodes, indexing="ij")
    w = np.outer(rule.weights, rule.weights)
    z1 = factor[0, 0] * u1 + factor[0, 1] * u2
    z2 = factor[1, 0] * u1 + factor[1, 1] * u2
    return float(np.sum(w * np.asarray(f(z1, z2), dtype=float)))
