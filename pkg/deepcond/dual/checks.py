"""
Grid checks of the one-layer dual-activation lemmas.

Every check returns a result dict {"ok", "classification", "check", "issues",
"points"}; a failing inequality becomes an issue entry, never an exception.

Public API:
- check_convexity(d)
- check_oddness_bound(d)
- check_one_layer_contraction(d)
- check_dot_ratio(d)
- check_uncentered_one_layer(d)
- check_norm_concavity(spec)
- check_norm_contraction(spec)
- check_dot_product_monotonicity(spec)
"""
from __future__ import annotations

import logging
from typing import Any, Dict, Iterable, List, Sequence, Tuple

import numpy as np

from deepcond.dual.activations import ActivationSpec
from deepcond.dual.duals import (
    DualActivation,
    dual_derivative_eval,
    dual_eval,
    fixed_point,
)
from deepcond.dual.norms import dot_product_map, norm_transfer

log = logging.getLogger("deepcond.dual")

CHECK_TOL = 1e-6
VERIFIED = "verified"
BOUND_VIOLATION = "bound_violation"
MAX_ISSUES = 20


def _result(check: str, issues: List[Dict[str, Any]], points: int) -> Dict[str, Any]:
    ok = not issues
    if not ok:
        log.warning("%s failed at %d of %d points", check, len(issues), points)
    return {
        "ok": ok,
        "classification": VERIFIED if ok else BOUND_VIOLATION,
        "check": check,
        "issues": issues[:MAX_ISSUES],
        "points": points,
    }


def _issue(**fields: float) -> Dict[str, Any]:
    return {k: float(v) for k, v in fields.items()}


# ==================================
# Standard dual on [-1, 1]
# ==================================
def check_convexity(d: DualActivation, points: int = 201) -> Dict[str, Any]:
    """Non-decreasing and convex on [0, 1]."""
    grid = np.linspace(0.0, 1.0, points)
    values = np.asarray(dual_eval(d, grid), dtype=float)
    first = np.diff(values)
    second = np.diff(first)
    scale = max(1.0, float(np.max(np.abs(values))))
    issues = [_issue(rho=grid[i], step=first[i]) for i in np.flatnonzero(first < -CHECK_TOL * scale)]
    issues += [_issue(rho=grid[i + 1], curvature=second[i]) for i in np.flatnonzero(second < -CHECK_TOL * scale)]
    return _result("convexity", issues, points)


def check_oddness_bound(d: DualActivation, points: int = 101) -> Dict[str, Any]:
    """|sigma_hat(-rho)| <= sigma_hat(rho) on [0, 1]."""
    grid = np.linspace(0.0, 1.0, points)
    pos = np.asarray(dual_eval(d, grid), dtype=float)
    neg = np.abs(np.asarray(dual_eval(d, -grid), dtype=float))
    bad = np.flatnonzero(neg > pos + CHECK_TOL)
    return _result("oddness_bound", [_issue(rho=grid[i], lhs=neg[i], rhs=pos[i]) for i in bad], points)


def check_one_layer_contraction(d: DualActivation, points: int = 200) -> Dict[str, Any]:
    """sigma_hat(1-delta) <= 1-(1+mu/2)delta for delta <= 1/2, else (1-mu/2)(1-delta)."""
    deltas = np.linspace(1.0 / points, 1.0, points)
    values = np.asarray(dual_eval(d, 1.0 - deltas), dtype=float)
    half = d.mu / 2.0
    bound = np.where(deltas <= 0.5, 1.0 - (1.0 + half) * deltas, (1.0 - half) * (1.0 - deltas))
    bad = np.flatnonzero(values > bound + CHECK_TOL)
    return _result(
        "one_layer_contraction",
        [_issue(delta=deltas[i], value=values[i], bound=bound[i]) for i in bad],
        points,
    )


def check_dot_ratio(d: DualActivation, points: int = 201) -> Dict[str, Any]:
    """sigma_hat'(rho) / sigma_hat'(1) <= 1 - mu (1 - |rho|) on [-1, 1]."""
    grid = np.linspace(-1.0, 1.0, points)
    top = float(dual_derivative_eval(d, 1.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        slopes = np.asarray(dual_derivative_eval(d, grid), dtype=float)
    if np.isfinite(top):
        ratio = slopes / top
    else:
        # an unbounded slope at 1 only survives at the endpoints
        ratio = np.where(np.isfinite(slopes), 0.0, 1.0)
    bound = 1.0 - d.mu * (1.0 - np.abs(grid))
    bad = np.flatnonzero(ratio > bound + CHECK_TOL)
    return _result("dot_ratio", [_issue(rho=grid[i], ratio=ratio[i], bound=bound[i]) for i in bad], points)


def check_uncentered_one_layer(d: DualActivation, points: int = 201) -> Dict[str, Any]:
    """Four-case one-layer bounds around the smallest fixed point rho_bar in [0, 1]."""
    fp = fixed_point(d)
    rho_bar, slope = fp.rho_bar, fp.derivative
    mt = d.mu_tilde
    at_zero = float(dual_eval(d, 0.0))
    grid = np.linspace(-1.0, 1.0, points)
    values = np.asarray(dual_eval(d, grid), dtype=float)
    mirrored = np.asarray(dual_eval(d, -grid), dtype=float)
    mid = (1.0 + rho_bar) / 2.0
    issues: List[Dict[str, Any]] = []
    for r, v, m in zip(grid, values, mirrored):
        if r >= mid:
            bound = r - mt / 2.0 * (1.0 - rho_bar) * (1.0 - r)
            if v > bound + CHECK_TOL:
                issues.append(_issue(case=1, rho=r, value=v, bound=bound))
        elif r >= rho_bar:
            bound = (1.0 - mt / 2.0 * (1.0 - rho_bar)) * abs(r - rho_bar)
            if abs(v - rho_bar) > bound + CHECK_TOL:
                issues.append(_issue(case=2, rho=r, value=v, bound=bound))
        elif r >= 0.0:
            bound = slope * abs(r - rho_bar)
            if abs(v - rho_bar) > bound + CHECK_TOL:
                issues.append(_issue(case=3, rho=r, value=v, bound=bound))
        else:
            if abs(v) > m + CHECK_TOL:
                issues.append(_issue(case=4, rho=r, value=v, bound=m))
            if v < r + at_zero - CHECK_TOL:
                issues.append(_issue(case=4, rho=r, value=v, bound=r + at_zero))
    out = _result("uncentered_one_layer", issues, points)
    out["rho_bar"] = rho_bar
    return out


# ==================================
# Norm transfer and general dot products
# ==================================
def check_norm_concavity(spec: ActivationSpec, lo: float = 0.05, hi: float = 4.0,
                         points: int = 80) -> Dict[str, Any]:
    """sigma_hat_l non-decreasing and concave on [lo, hi]."""
    ntm = norm_transfer(spec)
    grid = np.linspace(lo, hi, points)
    values = np.array([ntm.value(g) for g in grid])
    first = np.diff(values)
    second = np.diff(first)
    issues = [_issue(gamma=grid[i], step=first[i]) for i in np.flatnonzero(first < -CHECK_TOL)]
    issues += [_issue(gamma=grid[i + 1], curvature=second[i]) for i in np.flatnonzero(second > CHECK_TOL)]
    return _result("norm_concavity", issues, points)


def check_norm_contraction(spec: ActivationSpec, gammas: Iterable[float] | None = None) -> Dict[str, Any]:
    """|sigma_hat_l(gamma) - 1| <= (1 - alpha) |gamma - 1| for gamma >= 0.5."""
    ntm = norm_transfer(spec)
    grid = np.linspace(0.5, 4.0, 36) if gammas is None else np.asarray(list(gammas), dtype=float)
    issues = []
    for g in grid:
        lhs = abs(ntm.value(g) - 1.0)
        rhs = (1.0 - ntm.alpha) * abs(g - 1.0)
        if lhs > rhs + CHECK_TOL:
            issues.append(_issue(gamma=g, lhs=lhs, rhs=rhs))
    out = _result("norm_contraction", issues, len(grid))
    out["alpha"] = ntm.alpha
    return out


def check_dot_product_monotonicity(
    spec: ActivationSpec,
    norm_pairs: Sequence[Tuple[float, float]] = ((0.5, 0.5), (0.8, 1.3), (0.6, 2.0), (2.0, 3.0)),
    rhos: Sequence[float] = (-0.9, -0.5, -0.1, 0.2, 0.6, 0.95),
) -> Dict[str, Any]:
    """Normalized output correlation never exceeds |rho| in absolute value."""
    issues = []
    for gx, gy in norm_pairs:
        nx = dot_product_map(spec, gx, gx, 1.0)
        ny = dot_product_map(spec, gy, gy, 1.0)
        for r in rhos:
            corr = abs(dot_product_map(spec, gx, gy, r)) / np.sqrt(nx * ny)
            if corr > abs(r) + CHECK_TOL:
                issues.append(_issue(gamma_x=gx, gamma_y=gy, rho=r, correlation=corr))
    return _result("dot_product_monotonicity", issues, len(norm_pairs) * len(rhos))
