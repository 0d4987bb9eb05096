"""
Synthetic inputs with a prescribed separation.

Public API:
- synthetic_unit_inputs(n, delta, seed, d=3) -> ndarray
- random_unit_diagonal_psd(n, delta, seed) -> GramMatrix
"""
from __future__ import annotations

import numpy as np

from deepcond.conditioning.kernels import GramMatrix
from deepcond.errors import DomainError
from deepcond.montecarlo.rng import stream, unit_rows


def _check(n: int, delta: float) -> None:
    if n < 1:
        raise DomainError("need at least one input", {"n": n})
    if not 0.0 < delta <= 1.0:
        raise DomainError("delta must lie in (0, 1]", {"delta": delta})


def synthetic_unit_inputs(n: int, delta: float, seed: int, d: int = 3) -> np.ndarray:
    """Rows x_i = [sqrt(1-delta) u_i, sqrt(delta) e_i] in R^(d+n).

    The Gram matrix is (1-delta) U U^T + delta I: unit diagonal, off-diagonal
    entries at most 1-delta in absolute value and lambda_min >= delta.
    """
    _check(n, delta)
    if d < 1:
        raise DomainError("direction dimension must be positive", {"d": d})
    u = unit_rows(stream(seed, 0, 0), n, d)
    return np.hstack([np.sqrt(1.0 - delta) * u, np.sqrt(delta) * np.eye(n)])


def random_unit_diagonal_psd(n: int, delta: float, seed: int) -> GramMatrix:
    _check(n, delta)
    u = unit_rows(stream(seed, 0, 1), n, n)
    k = (1.0 - delta) * (u @ u.T) + delta * np.eye(n)
    np.fill_diagonal(k, 1.0)
    return GramMatrix.from_entries(k, unit_diagonal=True)
