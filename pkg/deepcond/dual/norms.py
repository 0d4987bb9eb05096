"""
Norm transfer and dot-product maps for inputs of arbitrary squared norm.

sigma_hat_l(gamma) = E[sigma(sqrt(gamma) z)^2] tracks a representation's
squared norm through one layer; sigma_hat_c combines generalized Hermite
coefficients at the two input norms.

Public API:
- NormTransferMap
- norm_transfer(spec) -> NormTransferMap
- check_activation_hypotheses(spec) -> dict
- generalized_expansion(spec, gamma, degree=60) -> HermiteExpansion
- dot_product_map(spec, gamma_x, gamma_y, rho, degree=60) -> float
- dot_product_quadrature(spec, gamma_x, gamma_y, rho) -> float
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Dict

import numpy as np

from deepcond.dual.activations import ActivationSpec
from deepcond.dual.duals import tail_degree
from deepcond.errors import DomainError
from deepcond.hermite.expansion import DEFAULT_DEGREE, HermiteExpansion, expand
from deepcond.hermite.quadrature import gaussian_expectation, pair_expectation

log = logging.getLogger("deepcond.dual")

GAMMA_WINDOW = (0.05, 20.0)
FD_STEP = 1e-5
_HYPOTHESIS_GRID = np.linspace(0.0, 6.0, 241)


@dataclass(frozen=True)
class NormTransferMap:
    source: ActivationSpec
    alpha_minus: float
    alpha_plus: float
    alpha: float
    hypotheses: Dict[str, Any] = field(default_factory=dict)

    def value(self, gamma: float) -> float:
        return _norm_value(self.source, gamma)

    def derivative(self, gamma: float) -> float:
        return _norm_derivative(self.source, gamma)


def _norm_value(spec: ActivationSpec, gamma: float) -> float:
    if not gamma > 0:
        raise DomainError("squared norm must be positive", {"gamma": gamma})
    return gaussian_expectation(lambda z: spec.evaluate(z) ** 2, gamma=gamma, kinks=spec.kinks)


def _norm_derivative(spec: ActivationSpec, gamma: float) -> float:
    # d/dgamma E[sigma^2(sqrt(gamma) X)] = E[sigma(z) sigma'(z) z] / gamma at z = sqrt(gamma) X
    if not gamma > 0:
        raise DomainError("squared norm must be positive", {"gamma": gamma})

    def integrand(z):
        return spec.evaluate(z) * spec.differentiate(z, FD_STEP) * z

    return gaussian_expectation(integrand, gamma=gamma, kinks=spec.kinks) / gamma


def check_activation_hypotheses(spec: ActivationSpec) -> Dict[str, Any]:
    """Numerical check of oddness, monotonicity and concavity on the positive half-line."""
    u = _HYPOTHESIS_GRID
    pos = spec.evaluate(u)
    neg = spec.evaluate(-u)
    scale = max(1.0, float(np.max(np.abs(pos))))
    odd = bool(np.max(np.abs(pos + neg)) <= 1e-9 * scale)
    full = np.concatenate([neg[::-1], pos[1:]])
    monotone = bool(np.all(np.diff(full) >= -1e-12 * scale))
    concave = bool(np.all(np.diff(pos, 2) <= 1e-9 * scale))
    ok = odd and monotone and concave
    out = {"odd": odd, "monotone": monotone, "concave_on_positives": concave, "ok": ok}
    if not ok:
        log.warning("activation %s fails norm-contraction hypotheses: %s", spec.name, out)
    return out


def norm_transfer(spec: ActivationSpec) -> NormTransferMap:
    alpha_minus = 2.0 * _norm_value(spec, 0.5) - 1.0
    alpha_plus = 1.0 - _norm_derivative(spec, 1.0)
    return NormTransferMap(
        source=spec,
        alpha_minus=alpha_minus,
        alpha_plus=alpha_plus,
        alpha=min(alpha_minus, alpha_plus),
        hypotheses=check_activation_hypotheses(spec),
    )


@lru_cache(maxsize=4096)
def _expansion_at(spec: ActivationSpec, gamma_key: float, degree: int) -> HermiteExpansion:
    return expand(spec, degree, gamma_key)


def generalized_expansion(spec: ActivationSpec, gamma: float, degree: int = DEFAULT_DEGREE) -> HermiteExpansion:
    return _expansion_at(spec, round(float(gamma), 15), degree)


def _check_window(gamma_x: float, gamma_y: float) -> None:
    lo, hi = GAMMA_WINDOW
    for label, g in (("gamma_x", gamma_x), ("gamma_y", gamma_y)):
        if not lo <= g <= hi:
            raise DomainError(f"{label} outside the expansion window [{lo}, {hi}]", {label: g})


def dot_product_map(spec: ActivationSpec, gamma_x: float, gamma_y: float, rho: float,
                    degree: int = DEFAULT_DEGREE) -> float:
    """sum_j a_j^{gamma_x} a_j^{gamma_y} rho^j, tails folded as sqrt(t_x t_y) rho^N'."""
    _check_window(gamma_x, gamma_y)
    if abs(rho) > 1 + 1e-9:
        raise DomainError("correlation outside [-1, 1]", {"rho": rho})
    r = float(np.clip(rho, -1.0, 1.0))
    ex = generalized_expansion(spec, gamma_x, degree)
    ey = generalized_expansion(spec, gamma_y, degree)
    products = ex.coefficients * ey.coefficients
    tail = np.sqrt(ex.tail_mass * ey.tail_mass)
    n_tail = tail_degree(np.abs(products))
    return float(np.polynomial.polynomial.polyval(r, products) + tail * r ** n_tail)


def dot_product_quadrature(spec: ActivationSpec, gamma_x: float, gamma_y: float, rho: float) -> float:
    """E[sigma(z1) sigma(z2)] under covariance [[gx, rho*sqrt(gx*gy)], [., gy]] by 2-D quadrature."""
    sx, sy = np.sqrt(gamma_x), np.sqrt(gamma_y)
    return pair_expectation(
        lambda x: spec.evaluate(sx * x),
        lambda y: spec.evaluate(sy * y),
        rho,
        kinks_f=tuple(k / sx for k in spec.kinks),
        kinks_g=tuple(k / sy for k in spec.kinks),
    )
