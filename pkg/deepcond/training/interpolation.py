"""
Minimum-norm kernel interpolation and its empirical excess risk.

Public API:
- Interpolant, min_norm_interpolator(K, y) -> Interpolant
- DATA_GENERATORS, generate_data(kind, n, dim, rng, target=None)
- ExcessRisk, excess_risk_estimate(spec, L=None, n=64, n_test=2000, data_gen="linear", seed=0, dim=16)
- RISK_COLUMNS
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np
import scipy.linalg

from deepcond.conditioning.bounds import depth_thresholds
from deepcond.conditioning.kernels import GramMatrix, compose_values, separation_delta, spectrum
from deepcond.dual.activations import ActivationSpec
from deepcond.dual.duals import dual_activation, dual_eval
from deepcond.errors import DomainError, NumericalError, PreconditionError
from deepcond.montecarlo.rng import stream, unit_rows
from deepcond.runtime.logging import timed

log = logging.getLogger("deepcond.training")

MIN_EIGENVALUE = 1e-10
MAX_KAPPA = 1e12
RESIDUAL_TOL = 1e-8
DATA_GENERATORS = ("linear", "zeros", "noise")
PROXY_FACTOR = 4

RISK_COLUMNS = ["n", "L", "delta", "excessRisk", "stdError", "predictorNorm", "testRisk", "proxyRisk", "maxResidual"]


@dataclass(frozen=True, eq=False)
class Interpolant:
    dual_weights: np.ndarray
    residuals: np.ndarray
    norm_squared: float
    kappa: float

    @property
    def max_residual(self) -> float:
        return float(np.max(np.abs(self.residuals), initial=0.0))

    @property
    def predictor_norm(self) -> float:
        return math.sqrt(max(self.norm_squared, 0.0))


def min_norm_interpolator(K: Union[GramMatrix, np.ndarray], y) -> Interpolant:
    """Dual weights K^-1 y by Cholesky with one refinement pass; norm^2 = y^T K^-1 y."""
    a = np.asarray(K.entries if isinstance(K, GramMatrix) else K, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if a.shape != (y.size, y.size):
        raise DomainError("kernel and labels differ in size", {"kernel": list(a.shape), "labels": y.size})
    eig = spectrum(a)
    if eig.lambda_min <= MIN_EIGENVALUE:
        raise DomainError("kernel is numerically singular: deepen the network",
                          {"lambda_min": eig.lambda_min})
    if eig.kappa > MAX_KAPPA:
        raise NumericalError("kernel too ill-conditioned for an exact solve: use greater depth",
                             {"kappa": eig.kappa})
    factor = scipy.linalg.cho_factor(a, lower=True)
    alpha = scipy.linalg.cho_solve(factor, y)
    alpha = alpha + scipy.linalg.cho_solve(factor, y - a @ alpha)
    residuals = a @ alpha - y
    out = Interpolant(dual_weights=alpha, residuals=residuals, norm_squared=float(y @ alpha), kappa=eig.kappa)
    if out.max_residual > RESIDUAL_TOL:
        log.warning("interpolation residual %.3e above %.0e (kappa %.3g)", out.max_residual, RESIDUAL_TOL, eig.kappa)
    return out


# ==================================
# Data generators
# ==================================
def generate_data(kind: str, n: int, dim: int, rng: np.random.Generator,
                  target: Optional[np.ndarray] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Unit-sphere inputs with labels in [-1, 1]: <target, x>, zeros or uniform noise."""
    if kind not in DATA_GENERATORS:
        raise DomainError(f"unknown data generator {kind!r}", {"known": list(DATA_GENERATORS)})
    x = unit_rows(rng, n, dim)
    if kind == "linear":
        if target is None:
            raise DomainError("the linear generator needs a unit target direction")
        y = x @ target
    elif kind == "zeros":
        y = np.zeros(n)
    else:
        y = rng.uniform(-1.0, 1.0, size=n)
    return x, y


# ==================================
# Excess risk
# ==================================
@dataclass(frozen=True)
class ExcessRisk:
    n: int
    depth: int
    delta: float
    excess_risk: float
    std_error: float
    predictor_norm: float
    test_risk: float
    proxy_risk: float
    max_residual: float

    def row(self):
        return [self.n, self.depth, self.delta, self.excess_risk, self.std_error, self.predictor_norm,
                self.test_risk, self.proxy_risk, self.max_residual]

    def as_dict(self) -> Dict[str, Any]:
        return dict(zip(RISK_COLUMNS, self.row()))


def _fit(d, x: np.ndarray, y: np.ndarray, depth: int) -> Interpolant:
    k = compose_values(d, x @ x.T, depth)
    np.fill_diagonal(k, 1.0)
    return min_norm_interpolator((k + k.T) / 2.0, y)


def _predict(d, fit: Interpolant, x_train: np.ndarray, x_new: np.ndarray, depth: int) -> np.ndarray:
    return compose_values(d, x_new @ x_train.T, depth) @ fit.dual_weights


def excess_risk_estimate(spec: ActivationSpec, L: Optional[int] = None, n: int = 64, n_test: int = 2000,
                         data_gen: str = "linear", seed: int = 0, dim: int = 16) -> ExcessRisk:
    """Test risk of the interpolator minus that of an interpolator fitted on PROXY_FACTOR * n fresh samples.

    The kernel is sigma_hat^(L)(x . x'). When L is None it is L1 of the
    separation delta measured on the training sample. Streams: training
    (seed, 0, 0), proxy (seed, 0, 1), test (seed, 0, 2), target (seed, 0, 3).
    The standard error is that of the paired per-point risk difference.
    """
    if n < 1 or n_test < 2:
        raise DomainError("need n >= 1 and n_test >= 2", {"n": n, "n_test": n_test})
    d = dual_activation(spec)
    if abs(float(dual_eval(d, 1.0)) - 1.0) > 1e-6:
        raise PreconditionError(f"activation {spec.name!r} is not square-normalized")
    target = unit_rows(stream(seed, 0, 3), 1, dim)[0]
    x, y = generate_data(data_gen, n, dim, stream(seed, 0, 0), target)
    xp, yp = generate_data(data_gen, PROXY_FACTOR * n, dim, stream(seed, 0, 1), target)
    xt, yt = generate_data(data_gen, n_test, dim, stream(seed, 0, 2), target)

    delta, _ = separation_delta(GramMatrix.from_entries(x @ x.T, unit_diagonal=True))
    if L is None:
        if delta <= 0.0 or d.mu <= 0.0:
            raise PreconditionError("cannot pick a depth: coincident inputs or linear activation",
                                    {"delta": delta, "mu": d.mu})
        L = depth_thresholds(d.mu, delta, n).l1
    with timed(log, f"excess risk n={n} L={L}"):
        fit = _fit(d, x, y, L)
        proxy = _fit(d, xp, yp, L)
        err = (_predict(d, fit, x, xt, L) - yt) ** 2
        err_proxy = (_predict(d, proxy, xp, xt, L) - yt) ** 2
    diff = err - err_proxy
    return ExcessRisk(
        n=n,
        depth=int(L),
        delta=float(delta),
        excess_risk=float(diff.mean()),
        std_error=float(diff.std(ddof=1) / math.sqrt(n_test)),
        predictor_norm=fit.predictor_norm,
        test_risk=float(err.mean()),
        proxy_risk=float(err_proxy.mean()),
        max_residual=fit.max_residual,
    )
