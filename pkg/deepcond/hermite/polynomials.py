"""
Orthonormal probabilist's Hermite polynomials, optionally for a N(0, gamma) base.

h_j^gamma(x) = h_j(x / sqrt(gamma)) where h_j = He_j / sqrt(j!) is orthonormal
under the standard Gaussian. Evaluated with the normalized three-term
recurrence, so no factorials are ever formed.

Public API:
- hermite_value(j, x, gamma=1.0) -> float | ndarray
- hermite_table(degree, x, gamma=1.0) -> ndarray of shape (degree+1, len(x))
"""
from __future__ import annotations

import numpy as np

from deepcond.errors import DomainError

MAX_DEGREE = 200


def _scaled_points(x, gamma: float) -> np.ndarray:
    if not gamma > 0:
        raise DomainError("base variance gamma must be positive", {"gamma": gamma})
    return np.asarray(x, dtype=float) / np.sqrt(gamma)


def hermite_table(degree: int, x, gamma: float = 1.0) -> np.ndarray:
    """Rows h_0..h_degree evaluated at every point of `x` (flattened)."""
    if degree < 0 or degree > MAX_DEGREE:
        raise DomainError(f"degree must be in [0, {MAX_DEGREE}]", {"degree": degree})
    t = np.atleast_1d(_scaled_points(x, gamma)).ravel()
    table = np.empty((degree + 1, t.size))
    table[0] = 1.0
    if degree >= 1:
        table[1] = t
    for k in range(1, degree):
        table[k + 1] = (t * table[k] - np.sqrt(k) * table[k - 1]) / np.sqrt(k + 1)
    return table


def hermite_value(j: int, x, gamma: float = 1.0):
    """Normalized h_j at every point of `x`, by the same recurrence as `hermite_table`."""
    if j < 0 or j > MAX_DEGREE:
        raise DomainError(f"degree must be in [0, {MAX_DEGREE}]", {"j": j})
    t = _scaled_points(x, gamma)
    prev = np.ones_like(t)
    if j == 0:
        return prev if prev.ndim else float(prev)
    cur = t.copy()
    for k in range(1, j):
        prev, cur = cur, (t * cur - np.sqrt(k) * prev) / np.sqrt(k + 1)
    return cur if cur.ndim else float(cur)
