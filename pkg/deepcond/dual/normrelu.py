"""
Closed forms for NormReLU_c(u) = lambda(c) * (max(u - c, 0) + b(c)).

Public API:
- NormReluConstants, NormReluTheoremConstants
- normrelu_constants(c) -> NormReluConstants
- normrelu_a0(gamma, c) / normrelu_norm(gamma, c) / normrelu_norm_derivative(gamma, c)
- normrelu_bias(gamma, c) -> float
- normrelu_theorem_constants(c, eps=None) -> NormReluTheoremConstants
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from scipy.stats import norm

from deepcond.dual.activations import NORMRELU_DEFAULT_C
from deepcond.errors import DomainError

BIAS_WINDOW = (0.25, 4.0)


@dataclass(frozen=True)
class NormReluConstants:
    c: float
    b: float
    lam: float
    mu: float
    cdf: float


@dataclass(frozen=True)
class NormReluTheoremConstants:
    alpha_minus: float
    alpha_plus: float
    alpha: float
    delta_prime: float
    mu: float
    l_hat: Optional[int]


def normrelu_constants(c: float = NORMRELU_DEFAULT_C) -> NormReluConstants:
    if not -10.0 <= c <= 10.0:
        raise DomainError("NormReLU shift must lie in [-10, 10]", {"c": c})
    cdf, pdf = float(norm.cdf(c)), float(norm.pdf(c))
    tail = 1.0 - cdf
    b = tail * c - pdf
    lam = (tail * cdf * c * c + (1.0 - 2.0 * cdf) * pdf * c + (tail - pdf * pdf)) ** -0.5
    mu = 1.0 - lam * lam * tail * tail
    return NormReluConstants(c=float(c), b=b, lam=lam, mu=mu, cdf=cdf)


def _pieces(gamma: float, c: float):
    if not gamma > 0:
        raise DomainError("squared norm must be positive", {"gamma": gamma})
    k = normrelu_constants(c)
    root = math.sqrt(gamma)
    t = c / root
    return k, root, 1.0 - float(norm.cdf(t)), float(norm.pdf(t))


def normrelu_a0(gamma: float, c: float = NORMRELU_DEFAULT_C) -> float:
    """Constant generalized Hermite coefficient a_0^gamma."""
    k, root, tail, pdf = _pieces(gamma, c)
    return k.lam * (root * pdf - tail * c + k.b)


def normrelu_norm(gamma: float, c: float = NORMRELU_DEFAULT_C) -> float:
    """sigma_hat_l(gamma) = E[NormReLU_c(sqrt(gamma) X)^2]."""
    k, root, tail, pdf = _pieces(gamma, c)
    b = k.b
    inner = (c * c + gamma - 2.0 * c * b) * tail + (2.0 * b - c) * root * pdf + b * b
    return k.lam * k.lam * inner


def normrelu_norm_derivative(gamma: float, c: float = NORMRELU_DEFAULT_C) -> float:
    k, root, tail, pdf = _pieces(gamma, c)
    return k.lam * k.lam * (tail + k.b / root * pdf)


def normrelu_bias(gamma: float, c: float = NORMRELU_DEFAULT_C) -> float:
    """(a_0^gamma)^2 / sum_j (a_j^gamma)^2; zero at gamma = 1."""
    lo, hi = BIAS_WINDOW
    if not lo <= gamma <= hi:
        raise DomainError(f"gamma must lie in [{lo}, {hi}]", {"gamma": gamma})
    a0 = normrelu_a0(gamma, c)
    return a0 * a0 / normrelu_norm(gamma, c)


def normrelu_theorem_constants(c: float = NORMRELU_DEFAULT_C, eps: Optional[float] = None) -> NormReluTheoremConstants:
    """alpha' = min(alpha-, alpha+), delta' and, given eps, the burn-in depth L_hat."""
    k = normrelu_constants(c)
    alpha_minus = 2.0 * normrelu_norm(0.5, c) - 1.0
    alpha_plus = 1.0 - normrelu_norm_derivative(1.0, c)
    alpha = min(alpha_minus, alpha_plus)
    if alpha <= 0:
        raise DomainError("NormReLU shift gives no norm contraction", {"c": c, "alpha": alpha})
    delta_prime = max(normrelu_bias(0.5, c) / alpha_minus, normrelu_bias(2.0, c) / alpha_plus)
    l_hat = None
    if eps is not None:
        if not eps > 0:
            raise DomainError("eps must be positive", {"eps": eps})
        l_hat = int(math.ceil((2.0 / alpha) * math.log(3.0 / min(eps, k.mu / 4.0))))
    return NormReluTheoremConstants(alpha_minus, alpha_plus, alpha, delta_prime, k.mu, l_hat)
