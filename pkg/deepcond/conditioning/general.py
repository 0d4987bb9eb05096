"""
Correlation recursions beyond the unit-norm, centered setting.

Public API:
- NormPropagation, general_norm_propagate(gamma_x, gamma_y, rho, spec, L, delta=None)
- UncenteredConvergence, uncentered_convergence(d, rho0, L, delta=None, eps=0.1)
- NormReluBound, normrelu_correlation_bound(gamma_x, gamma_y, rho, L, eps, c=NORMRELU_DEFAULT_C)
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from deepcond.conditioning.bounds import bound_B
from deepcond.dual.activations import NORMRELU_DEFAULT_C, ActivationSpec, get_activation
from deepcond.dual.duals import (
    DualActivation,
    compose,
    dual_activation,
    dual_eval,
    fixed_point,
)
from deepcond.dual.normrelu import normrelu_norm, normrelu_theorem_constants
from deepcond.dual.norms import check_activation_hypotheses, dot_product_map, norm_transfer
from deepcond.errors import DomainError, PreconditionError

log = logging.getLogger("deepcond.conditioning")

BOUND_TOL = 1e-9
MIN_NORM = 0.5
UNIT_SLOPE_TOL = 1e-6


def _issue(layer: int, bound: str, value: float, limit: float) -> Dict[str, Any]:
    log.warning("layer %d violates %s: %.6g vs %.6g", layer, bound, value, limit)
    return {"layer": layer, "bound": bound, "value": float(value), "limit": float(limit)}


def _correlation_step(spec: ActivationSpec, gx: float, gy: float, rho: float, nx: float, ny: float) -> float:
    r = dot_product_map(spec, gx, gy, rho) / math.sqrt(nx * ny)
    return float(np.clip(r, -1.0, 1.0))


# ==================================
# General input norms
# ==================================
@dataclass
class NormPropagation:
    gamma_x: float
    gamma_y: float
    rho: float
    alpha: float
    mu: float
    l_hat: float
    hypotheses: Dict[str, Any]
    trace: List[Dict[str, Any]] = field(default_factory=list)
    issues: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues


def general_norm_propagate(gamma_x: float, gamma_y: float, rho: float, spec: ActivationSpec, L: int,
                           delta: Optional[float] = None) -> NormPropagation:
    """Joint recursion of squared norms and correlation with the norm and correlation bounds per layer.

    The correlation bound B_{mu/2}(L - L_hat, delta) applies from L_hat =
    (1/alpha) log(4 max(|gx-1|, |gy-1|, mu/4) / mu) on.
    """
    if min(gamma_x, gamma_y) < MIN_NORM:
        raise PreconditionError(f"squared norms must be at least {MIN_NORM}",
                                {"gamma_x": gamma_x, "gamma_y": gamma_y})
    if L < 0:
        raise DomainError("depth must be non-negative", {"L": L})
    if abs(rho) > 1.0 + BOUND_TOL:
        raise DomainError("correlation outside [-1, 1]", {"rho": rho})
    if delta is None:
        delta = 1.0 - abs(rho)
    if not 0.0 < delta <= 1.0 or abs(rho) > 1.0 - delta + BOUND_TOL:
        raise PreconditionError("correlation must satisfy |rho| <= 1 - delta with delta > 0",
                                {"rho": rho, "delta": delta})

    hypotheses = check_activation_hypotheses(spec)
    ntm = norm_transfer(spec)
    d = dual_activation(spec)
    mu, alpha = d.mu, ntm.alpha
    l_hat = math.inf
    if alpha > 0 and mu > 0:
        spread = max(abs(gamma_x - 1.0), abs(gamma_y - 1.0), mu / 4.0)
        l_hat = max(math.log(4.0 * spread / mu) / alpha, 0.0)
    else:
        log.warning("activation %s has alpha=%.3g, mu=%.3g: no correlation bound", spec.name, alpha, mu)
    start = (gamma_x, gamma_y)

    out = NormPropagation(gamma_x, gamma_y, float(rho), alpha, mu, l_hat, hypotheses)
    gx, gy, r = float(gamma_x), float(gamma_y), float(np.clip(rho, -1.0, 1.0))
    for layer in range(L + 1):
        if layer > 0:
            nx, ny = ntm.value(gx), ntm.value(gy)
            r = _correlation_step(spec, gx, gy, r, nx, ny)
            gx, gy = nx, ny
        row: Dict[str, Any] = {"layer": layer, "gamma_x": gx, "gamma_y": gy, "rho": r}
        if alpha > 0:
            for label, g, g0 in (("x", gx, start[0]), ("y", gy, start[1])):
                limit = (1.0 - alpha) ** layer * abs(g0 - 1.0)
                row[f"norm_bound_{label}"] = limit
                if abs(g - 1.0) > limit + BOUND_TOL:
                    out.issues.append(_issue(layer, f"norm_{label}", abs(g - 1.0), limit))
        corr_bound = None
        if math.isfinite(l_hat) and layer >= l_hat:
            corr_bound = bound_B(mu / 2.0, layer - math.ceil(l_hat), delta)
            if abs(r) > corr_bound + BOUND_TOL:
                out.issues.append(_issue(layer, "correlation", abs(r), corr_bound))
        row["correlation_bound"] = corr_bound
        out.trace.append(row)
    out.gamma_x, out.gamma_y, out.rho = gx, gy, r
    return out


# ==================================
# Uncentered activations
# ==================================
@dataclass
class UncenteredConvergence:
    trace: List[float]
    rho_bar: float
    derivative_at_fixed_point: float
    l0: Optional[int]
    rate: Optional[float]
    rate_bound: List[Optional[float]]
    unit_slope_edge: bool = False
    eps: Optional[float] = None
    layers_to_reach: Optional[int] = None
    edge_bound: Optional[int] = None
    issues: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues


def _l0_uncentered(rho_bar: float, delta: float, mu_tilde: float, at_zero: float) -> int:
    ratio = (1.0 - rho_bar) / (2.0 * delta)
    first = 0
    if rho_bar < 1.0 and ratio > 1.0:
        first = int(math.ceil(math.log(ratio) / math.log1p(mu_tilde * (1.0 - rho_bar) / 2.0)))
    return max(first, int(math.ceil(1.0 / at_zero)))


def uncentered_convergence(d: DualActivation, rho0: float, L: int, delta: Optional[float] = None,
                           eps: float = 0.1) -> UncenteredConvergence:
    """Distance of the composed correlation to the smallest fixed point rho_bar, with its rate bound.

    When rho_bar = 1 and sigma_hat'(1) = 1 the convergence is only polynomial;
    the result then reports the layer count needed to reach 1 - eps next to
    max(ceil(log(2/eps) / -log(1 - eps mu_tilde/2)), ceil(1/sigma_hat(0))).
    """
    if L < 0:
        raise DomainError("depth must be non-negative", {"L": L})
    fp = fixed_point(d)
    trace = [float(v) for v in compose(d, rho0, L)[:, 0]]
    at_zero = float(dual_eval(d, 0.0))
    if delta is None:
        delta = 1.0 - abs(rho0)

    if at_zero <= 1e-12:
        # centered: rho_bar = 0 and the decay is B-type
        bounds_ = [bound_B(d.mu, l, delta) if delta > 0 and d.mu > 0 else None for l in range(L + 1)]
        out = UncenteredConvergence(trace, 0.0, fp.derivative, None, None, bounds_)
        for l, (v, b) in enumerate(zip(trace, bounds_)):
            if b is not None and abs(v) > b + BOUND_TOL:
                out.issues.append(_issue(l, "centered_decay", abs(v), b))
        return out

    if fp.rho_bar >= 1.0 and abs(fp.derivative - 1.0) <= UNIT_SLOPE_TOL:
        if not 0.0 < eps < 0.5:
            raise DomainError("eps must lie in (0, 1/2)", {"eps": eps})
        edge = max(
            int(math.ceil(math.log(2.0 / eps) / -math.log1p(-eps * d.mu_tilde / 2.0))),
            int(math.ceil(1.0 / at_zero)),
        )
        reach = next((l for l, v in enumerate(trace) if v >= 1.0 - eps), None)
        out = UncenteredConvergence(trace, 1.0, fp.derivative, None, None, [None] * (L + 1),
                                    unit_slope_edge=True, eps=eps, layers_to_reach=reach, edge_bound=edge)
        if L >= edge and (reach is None or reach > edge):
            out.issues.append(_issue(L, "edge_layers", float("inf") if reach is None else reach, edge))
        return out

    rho_bar = fp.rho_bar
    rate = max(1.0 - d.mu_tilde * (1.0 - rho_bar) / 2.0, fp.derivative)
    if delta <= 0:
        out = UncenteredConvergence(trace, rho_bar, fp.derivative, None, rate, [None] * (L + 1))
        return out
    l0 = _l0_uncentered(rho_bar, delta, d.mu_tilde, at_zero)
    bounds_ = [rate ** (l - l0) * (1.0 + rho_bar) / 2.0 if l >= l0 else None for l in range(L + 1)]
    out = UncenteredConvergence(trace, rho_bar, fp.derivative, l0, rate, bounds_)
    for l, (v, b) in enumerate(zip(trace, bounds_)):
        if b is not None and abs(v - rho_bar) > b + BOUND_TOL:
            out.issues.append(_issue(l, "fixed_point_rate", abs(v - rho_bar), b))
    return out


# ==================================
# NormReLU
# ==================================
@dataclass
class NormReluBound:
    measured_rho: float
    bound: Optional[float]
    holds: Optional[bool]
    l_hat: int
    delta: float
    delta_prime: float
    alpha: float
    trace: List[Dict[str, float]] = field(default_factory=list)


def normrelu_correlation_bound(gamma_x: float, gamma_y: float, rho: float, L: int, eps: float,
                               c: float = NORMRELU_DEFAULT_C) -> NormReluBound:
    """|rho_L| <= B_{mu/2}(L - L_hat, delta - delta') + delta' eps for L >= L_hat."""
    for label, g in (("gamma_x", gamma_x), ("gamma_y", gamma_y)):
        if not 0.5 <= g <= 2.0:
            raise DomainError(f"{label} must lie in [0.5, 2]", {label: g})
    if L < 0:
        raise DomainError("depth must be non-negative", {"L": L})
    k = normrelu_theorem_constants(c, eps)
    delta = 1.0 - abs(rho)
    if delta <= k.delta_prime:
        raise PreconditionError("correlation too close to 1 for the NormReLU bound",
                                {"delta": delta, "delta_prime": k.delta_prime})
    spec = get_activation("normrelu", c=c)
    gx, gy, r = float(gamma_x), float(gamma_y), float(rho)
    trace = [{"layer": 0, "gamma_x": gx, "gamma_y": gy, "rho": r}]
    for layer in range(1, L + 1):
        nx, ny = normrelu_norm(gx, c), normrelu_norm(gy, c)
        r = _correlation_step(spec, gx, gy, r, nx, ny)
        gx, gy = nx, ny
        trace.append({"layer": layer, "gamma_x": gx, "gamma_y": gy, "rho": r})
    bound = holds = None
    if L >= k.l_hat:
        bound = bound_B(k.mu / 2.0, L - k.l_hat, delta - k.delta_prime) + k.delta_prime * eps
        holds = abs(r) <= bound + BOUND_TOL
        if not holds:
            _issue(L, "normrelu_correlation", abs(r), bound)
    return NormReluBound(r, bound, holds, k.l_hat, delta, k.delta_prime, k.alpha, trace)
