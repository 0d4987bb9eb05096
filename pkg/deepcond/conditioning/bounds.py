"""
Closed-form decay and condition-number bounds.

B_nu(L, delta) is the correlation envelope shared by every theorem in the
package; the thresholds L0 <= L1 <= L2 are exact integer formulas.

Public API:
- BoundParams
- l0_threshold(nu, delta) -> int
- bound_B(nu, L, delta) -> float
- depth_thresholds(mu, delta, n) -> BoundParams
- top_layer_kappa_bound / top_layer_kappa_bound_stronger
- ntk_offdiag_bound / ntk_lambda_min_bound / ntk_kappa_bound / ntk_kappa_bound_stronger
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from deepcond.errors import DomainError

# ceil() guard: log ratios that should be integers come out as k + 1e-16
_CEIL_DIGITS = 12


@dataclass(frozen=True)
class BoundParams:
    nu: float
    delta: float
    n: int
    l0: int
    l1: int
    l2: int


def _ceil(x: float) -> int:
    return int(math.ceil(round(x, _CEIL_DIGITS)))


def _validate(nu: float, delta: float) -> None:
    if not 0.0 < nu <= 1.0:
        raise DomainError("nu must lie in (0, 1]", {"nu": nu})
    if not 0.0 < delta <= 1.0:
        raise DomainError("delta must lie in (0, 1]", {"delta": delta})


def l0_threshold(nu: float, delta: float) -> int:
    """L0(delta) = max(ceil(log(1/(2 delta)) / log(1 + nu/2)), 0)."""
    _validate(nu, delta)
    return max(_ceil(math.log(1.0 / (2.0 * delta)) / math.log1p(nu / 2.0)), 0)


def bound_B(nu: float, L: float, delta: float) -> float:
    """Piecewise envelope; L may be fractional (the NTK bounds evaluate B at L/2)."""
    _validate(nu, delta)
    if L < 0:
        raise DomainError("depth must be non-negative", {"L": L})
    l0 = l0_threshold(nu, delta)
    if L <= l0:
        return 1.0 - delta * (1.0 + nu / 2.0) ** L
    return 0.5 * (1.0 - nu / 2.0) ** (L - l0)


def depth_thresholds(mu: float, delta: float, n: int) -> BoundParams:
    if n < 1:
        raise DomainError("need at least one input", {"n": n})
    l0 = l0_threshold(mu, delta)
    rate = -math.log1p(-mu / 2.0)
    l1 = _ceil(math.log(n) / rate) + l0
    l2 = _ceil(2.0 * math.log(2 * n) / rate) + 2 * l0
    return BoundParams(nu=mu, delta=delta, n=n, l0=l0, l1=l1, l2=l2)


# ==================================
# Top-layer kernel
# ==================================
def top_layer_kappa_bound(mu: float, delta: float, n: int, L: int) -> Optional[float]:
    """1 + 2n(1-mu/2)^(L-L1) under separation; None below L1."""
    p = depth_thresholds(mu, delta, n)
    if L < p.l1:
        return None
    return 1.0 + 2.0 * n * (1.0 - mu / 2.0) ** (L - p.l1)


def top_layer_kappa_bound_stronger(mu: float, delta: float, n: int, L: int) -> float:
    """1 + (n/delta)(1+mu/2)^(-L) under non-singularity with lambda_min >= delta."""
    _validate(mu, delta)
    return 1.0 + (n / delta) * (1.0 + mu / 2.0) ** (-L)


# ==================================
# Neural tangent kernel
# ==================================
def ntk_offdiag_bound(mu: float, delta: float, L: int) -> Optional[float]:
    """2 B(L/2, delta), the bound on |K_ij| / K_11; None below 2 L0."""
    if L < 2 * l0_threshold(mu, delta):
        return None
    return 2.0 * bound_B(mu, L / 2.0, delta)


def ntk_lambda_min_bound(mu: float, delta: float, L: int) -> float:
    """1 - 2 B(L/2, delta), the bound on lambda_min / K_11 under non-singularity.

    Holds at every depth; it is non-positive, and so vacuous, until B(L/2) < 1/2.
    """
    return 1.0 - 2.0 * bound_B(mu, L / 2.0, delta)


def ntk_kappa_bound(mu: float, delta: float, n: int, L: int) -> Optional[float]:
    p = depth_thresholds(mu, delta, n)
    if L < p.l2:
        return None
    return 1.0 + 4.0 * n * (1.0 - mu / 2.0) ** (L / 2.0 - p.l2)


def ntk_kappa_bound_stronger(mu: float, delta: float, n: int, L: int) -> Optional[float]:
    if L < 4 * l0_threshold(mu, delta):
        return None
    return 1.0 + (2.0 * n / delta) * (1.0 + mu / 2.0) ** (-L / 2.0)
