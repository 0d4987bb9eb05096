"""
Monte Carlo experiments comparing finite-width networks with their
infinite-width limits.

Trials run through a thread pool and are reduced in trial order, so every
summary is bit-identical for any thread count.

Public API:
- TrialSummary
- run_trials(fn, trials, threads=None) -> list
- kernel_concentration(cfg, X, trials, widths, threads=None) -> list[dict]
- ntk_concentration(cfg, X, trials, threads=None) -> dict
- correlation_decay_experiment(cfg, x, y, trials, threads=None) -> dict
- one_layer_min_singular_experiment(n, m, delta, trials, seed, ...) -> dict
- bn_invariance_check(raw, batch, w) -> dict
- unbiasedness_check(spec, x, y, draws, seed) -> dict
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Any, Callable, Dict, List, Optional, Sequence, TypeVar

import numpy as np

from deepcond.conditioning.bounds import bound_B, l0_threshold
from deepcond.conditioning.kernels import GramMatrix, ntk_matrix, propagate_kernel, spectrum
from deepcond.dual.activations import ActivationSpec, get_activation, normalize
from deepcond.dual.duals import dual_activation, dual_eval
from deepcond.errors import ConfigurationError, DegenerateInputError, DomainError, PreconditionError
from deepcond.montecarlo.network import (
    NetworkConfig,
    empirical_ntk,
    features,
    sample_layer_features,
    sample_network,
)
from deepcond.montecarlo.rng import stream, unit_rows
from deepcond.runtime.logging import timed

log = logging.getLogger("deepcond.montecarlo")

T = TypeVar("T")

STAT_GATE = 4.0
NTK_GATE = 5.0
UNBIASED_GATE = 5.0
BN_TOL = 1e-10
MIN_DRAWS = 10_000


@dataclass(frozen=True, eq=False)
class TrialSummary:
    mean: np.ndarray
    std_error: np.ndarray
    trial_count: int

    @classmethod
    def from_samples(cls, samples: Sequence) -> "TrialSummary":
        a = np.asarray(samples, dtype=float)
        t = a.shape[0]
        if t == 0:
            raise DomainError("no trials to summarize")
        mean = a.mean(axis=0)
        se = a.std(axis=0, ddof=1) / math.sqrt(t) if t > 1 else np.zeros_like(mean)
        return cls(mean=mean, std_error=se, trial_count=t)

    def as_dict(self) -> Dict[str, Any]:
        return {
            "mean": np.asarray(self.mean).tolist(),
            "stdError": np.asarray(self.std_error).tolist(),
            "trials": self.trial_count,
        }


def run_trials(fn: Callable[[int], T], trials: int, threads: Optional[int] = None) -> List[T]:
    if trials < 1:
        raise ConfigurationError("trials must be positive", {"trials": trials})
    with ThreadPoolExecutor(max_workers=threads or 1) as pool:
        return list(pool.map(fn, range(trials)))


def _unit_kernel_dual(spec: ActivationSpec):
    d = dual_activation(spec)
    if abs(float(dual_eval(d, 1.0)) - 1.0) > 1e-6:
        raise PreconditionError(f"activation {spec.name!r} is not square-normalized")
    return d


# ==================================
# Kernel and NTK concentration
# ==================================
def kernel_concentration(cfg: NetworkConfig, X, trials: int, widths: Sequence[int],
                         threads: Optional[int] = None) -> List[Dict[str, Any]]:
    """Mean |K_ij - K_bar_ij| over the off-diagonal, per width, with its standard error."""
    d = _unit_kernel_dual(cfg.activation)
    x = np.atleast_2d(np.asarray(X, dtype=float))
    target = propagate_kernel(GramMatrix.from_entries(x @ x.T, unit_diagonal=True), d, cfg.depth).entries
    iu = np.triu_indices(x.shape[0], 1)
    rows = []
    for m in widths:
        wide = replace(cfg, width=int(m))

        def trial(t: int, wide=wide) -> float:
            h = sample_layer_features(wide, x, t)[-1]
            return float(np.mean(np.abs((h @ h.T)[iu] - target[iu])))

        with timed(log, f"kernel concentration m={m}"):
            summary = TrialSummary.from_samples(run_trials(trial, trials, threads))
        rows.append({"width": int(m), "mean_abs_error": float(summary.mean),
                     "std_error": float(summary.std_error), "trials": trials})
    return rows


def ntk_concentration(cfg: NetworkConfig, X, trials: int, threads: Optional[int] = None) -> Dict[str, Any]:
    """Empirical NTK entries against ntk_matrix, gated at NTK_GATE standard errors."""
    d = _unit_kernel_dual(cfg.activation)
    x = np.atleast_2d(np.asarray(X, dtype=float))
    target = ntk_matrix(GramMatrix.from_entries(x @ x.T, unit_diagonal=True), d, cfg.depth).entries

    def trial(t: int) -> np.ndarray:
        return np.asarray(empirical_ntk(sample_network(cfg, t), x).entries)

    with timed(log, f"ntk concentration m={cfg.width}"):
        summary = TrialSummary.from_samples(run_trials(trial, trials, threads))
    gap = np.abs(summary.mean - target)
    limit = NTK_GATE * summary.std_error + 1e-9 * np.abs(target)
    bad = np.argwhere(gap > limit)
    issues = [{"i": int(i), "j": int(j), "mean": float(summary.mean[i, j]), "target": float(target[i, j]),
               "std_error": float(summary.std_error[i, j])} for i, j in bad]
    return {"ok": not issues, "issues": issues, "summary": summary.as_dict(), "target": target.tolist()}


# ==================================
# Correlation decay with per-layer projection
# ==================================
def correlation_decay_experiment(cfg: NetworkConfig, x, y, trials: int,
                                 threads: Optional[int] = None) -> Dict[str, Any]:
    """Per-depth mean and standard error of rho_h = h_L(x) . h_L(y) against B(h, delta)."""
    if not cfg.normalize_layers:
        raise PreconditionError("the decay experiment needs per-layer projection (normalize_layers)")
    pair = np.vstack([np.asarray(x, dtype=float), np.asarray(y, dtype=float)])
    rho0 = float(pair[0] @ pair[1])
    same = bool(np.array_equal(pair[0], pair[1]))
    delta = 1.0 - abs(rho0)
    d = dual_activation(cfg.activation)
    mu = d.mu

    def trial(t: int) -> np.ndarray:
        reps = sample_layer_features(cfg, pair, t)
        return np.array([float(h[0] @ h[1]) for h in reps])

    with timed(log, f"correlation decay L={cfg.depth} m={cfg.width}"):
        summary = TrialSummary.from_samples(run_trials(trial, trials, threads))
    mean, se = summary.mean, summary.std_error

    issues: List[Dict[str, Any]] = []
    bounds_: List[Optional[float]] = [None] * (cfg.depth + 1)
    l0 = None
    if not same and delta > 0 and mu > 0:
        l0 = l0_threshold(mu, delta)
        for h in range(cfg.depth + 1):
            b = bound_B(mu, h, delta)
            bounds_[h] = b
            if abs(mean[h]) > b + STAT_GATE * se[h] + 1e-9:
                issues.append({"depth": h, "mean": float(mean[h]), "bound": b, "std_error": float(se[h])})
    for issue in issues:
        log.warning("correlation decay above B at depth %d: %.4g > %.4g", issue["depth"], issue["mean"], issue["bound"])

    rate = None
    if l0 is not None:
        hs = [h for h in range(l0 + 1, cfg.depth + 1) if abs(mean[h]) > STAT_GATE * se[h] and mean[h] != 0]
        if len(hs) >= 2:
            slope = np.polyfit(np.array(hs, dtype=float), np.log(np.abs(mean[hs])), 1)[0]
            rate = float(math.exp(slope))
    return {
        "ok": not issues,
        "issues": issues,
        "rho0": rho0,
        "delta": delta,
        "mu": mu,
        "l0": l0,
        "summary": summary.as_dict(),
        "bound": bounds_,
        "fitted_rate": rate,
        "reference_rate": 1.0 - mu / 4.0,
    }


# ==================================
# One-layer smallest singular value
# ==================================
def _separated_inputs(n: int, dim: int, delta: float, seed: int, max_draws: int) -> np.ndarray:
    rng = stream(seed, 0, 0)
    accepted: List[np.ndarray] = []
    draws = 0
    while len(accepted) < n:
        if draws >= max_draws:
            raise ConfigurationError("rejection sampling exceeded its draw budget",
                                     {"n": n, "delta": delta, "dim": dim, "max_draws": max_draws})
        cand = unit_rows(rng, 1, dim)[0]
        draws += 1
        if all(abs(float(cand @ a)) <= 1.0 - delta for a in accepted):
            accepted.append(cand)
    return np.vstack(accepted)


def one_layer_min_singular_experiment(n: int, m: int, delta: float, trials: int, seed: int,
                                      dim: Optional[int] = None, inputs=None, max_draws: int = 100_000,
                                      threads: Optional[int] = None) -> Dict[str, Any]:
    """Smallest eigenvalue of the one-layer raw-ReLU feature Gram Phi(X)^T Phi(X) across trials."""
    if inputs is None:
        if not 0.0 <= delta <= 1.0:
            raise DomainError("delta must lie in [0, 1]", {"delta": delta})
        x = _separated_inputs(n, dim or max(n, 3), delta, seed, max_draws)
    else:
        x = np.atleast_2d(np.asarray(inputs, dtype=float))
        n = x.shape[0]
    cfg = NetworkConfig(input_dim=x.shape[1], width=m, depth=1, activation=get_activation("relu"), seed=seed)

    def trial(t: int) -> float:
        F = features(sample_network(cfg, t), x)
        return spectrum((F @ F.T + (F @ F.T).T) / 2.0).lambda_min

    values = run_trials(trial, trials, threads)
    summary = TrialSummary.from_samples(values)
    reference = delta ** 1.5 / n ** 3 if delta > 0 else None
    smallest = float(min(values))
    return {
        "ok": smallest > 0.0,
        "sigma_min": smallest,
        "summary": summary.as_dict(),
        "reference": reference,
        "ratio": None if reference is None else smallest / reference,
        "n": n,
        "width": m,
        "delta": delta,
    }


# ==================================
# Normalization invariance and one-layer unbiasedness
# ==================================
def _standardize(t: np.ndarray, axis: int) -> np.ndarray:
    centered = t - t.mean(axis=axis, keepdims=True)
    var = np.mean(centered * centered, axis=axis, keepdims=True)
    if np.any(var <= 1e-24):
        raise DegenerateInputError("zero variance under normalization", {"axis": axis})
    return centered / np.sqrt(var)


def bn_invariance_check(raw: ActivationSpec, batch, w) -> Dict[str, Any]:
    """Batch norm of w^T sigma(U)/sqrt(m) and layer norm of sigma(U)/sqrt(m) agree for sigma and its normalization."""
    u = np.atleast_2d(np.asarray(batch, dtype=float))
    w = np.asarray(w, dtype=float)
    m = u.shape[1]
    if w.shape != (m,):
        raise DomainError("weight vector must match the batch width", {"width": m, "w": list(w.shape)})
    tilde = normalize(raw)
    scale = 1.0 / math.sqrt(m)
    outputs = {}
    for label, spec in (("raw", raw), ("normalized", tilde)):
        act = spec.evaluate(u) * scale
        outputs[label] = (_standardize(act @ w, axis=0), _standardize(act, axis=1))
    bn = float(np.max(np.abs(outputs["raw"][0] - outputs["normalized"][0])))
    ln = float(np.max(np.abs(outputs["raw"][1] - outputs["normalized"][1])))
    worst = max(bn, ln)
    return {"ok": worst <= BN_TOL, "bn_max_abs_deviation": bn, "ln_max_abs_deviation": ln,
            "max_abs_deviation": worst}


def unbiasedness_check(spec: ActivationSpec, x, y, draws: int, seed: int) -> Dict[str, Any]:
    """Width-one average of sigma(w.x) sigma(w.y) against sigma_hat(x.y)."""
    if draws < MIN_DRAWS:
        raise ConfigurationError(f"need at least {MIN_DRAWS} draws", {"draws": draws})
    pair = np.vstack([np.asarray(x, dtype=float), np.asarray(y, dtype=float)])
    w = stream(seed, 0, 1).standard_normal((draws, pair.shape[1]))
    g = w @ pair.T
    samples = spec.evaluate(g[:, 0]) * spec.evaluate(g[:, 1])
    summary = TrialSummary.from_samples(samples)
    target = float(dual_eval(dual_activation(spec), float(pair[0] @ pair[1])))
    gap = abs(float(summary.mean) - target)
    return {"ok": gap <= UNBIASED_GATE * float(summary.std_error) + 1e-12, "mean": float(summary.mean),
            "std_error": float(summary.std_error), "target": target, "draws": draws}
