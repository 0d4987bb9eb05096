"""
Depth profiles: measured spectra of the infinite-width kernels next to the
bounds that apply at each depth.

Bound violations are recorded on the profile and logged, never raised.

Public API:
- DepthRecord, DepthProfile
- verify_top_layer(K, d, L_max, threads=None) -> DepthProfile
- verify_ntk(K, d, L_max, threads=None) -> DepthProfile
- PROFILE_COLUMNS
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from deepcond.conditioning import bounds
from deepcond.conditioning.kernels import (
    GramMatrix,
    Spectrum,
    gershgorin_check,
    ntk_matrix,
    propagate_trace,
    separation_delta,
    spectrum,
)
from deepcond.dual.duals import DualActivation
from deepcond.errors import DomainError, PreconditionError
from deepcond.runtime.logging import timed

log = logging.getLogger("deepcond.conditioning")

BOUND_TOL = 1e-9
DIAGONAL_TOL = 1e-10

PROFILE_COLUMNS = [
    "L",
    "maxOffDiag",
    "lambdaMin",
    "lambdaMax",
    "kappa",
    "boundB",
    "boundKappa",
    "boundLambdaMin",
    "boundKappaStronger",
]


@dataclass
class DepthRecord:
    depth: int
    max_off_diag: float
    lambda_min: float
    lambda_max: float
    kappa: float
    bound_b: float = float("nan")
    bound_kappa: float = float("nan")
    bound_lambda_min: float = float("nan")
    bound_kappa_stronger: float = float("nan")
    diagonal: float = 1.0

    def row(self) -> List[float]:
        return [
            self.depth,
            self.max_off_diag,
            self.lambda_min,
            self.lambda_max,
            self.kappa,
            self.bound_b,
            self.bound_kappa,
            self.bound_lambda_min,
            self.bound_kappa_stronger,
        ]


@dataclass
class DepthProfile:
    kind: str
    activation: str
    n: int
    delta_separation: float
    delta_nonsingular: float
    mu: float
    bounds_checked: bool
    params: Optional[bounds.BoundParams]
    records: List[DepthRecord] = field(default_factory=list)
    issues: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues

    def summary(self) -> Dict[str, Any]:
        return {
            "ok": self.ok,
            "classification": "verified" if self.ok else "bound_violation",
            "kind": self.kind,
            "activation": self.activation,
            "n": self.n,
            "delta_separation": self.delta_separation,
            "delta_nonsingular": self.delta_nonsingular,
            "mu": self.mu,
            "bounds_checked": self.bounds_checked,
            "thresholds": None if self.params is None else {
                "L0": self.params.l0, "L1": self.params.l1, "L2": self.params.l2,
            },
            "issues": self.issues,
        }


def _nan(x: Optional[float]) -> float:
    return float("nan") if x is None else float(x)


def _deltas(K: GramMatrix) -> Tuple[float, float]:
    if not K.unit_diagonal:
        raise DomainError("depth profiles need unit-norm inputs")
    delta_sep, pair = separation_delta(K)
    if delta_sep <= 0.0:
        raise PreconditionError(
            f"inputs {pair[0]} and {pair[1]} coincide up to sign; separation delta is {delta_sep:.3g}",
            {"pair": list(pair), "delta": delta_sep},
        )
    return delta_sep, spectrum(K).lambda_min


def _spectra(matrices: List[np.ndarray], threads: Optional[int]) -> List[Spectrum]:
    # map() preserves depth order
    with ThreadPoolExecutor(max_workers=threads or 1) as pool:
        return list(pool.map(spectrum, matrices))


def _max_off(a: np.ndarray) -> float:
    n = a.shape[0]
    if n == 1:
        return 0.0
    return float(np.max(np.abs(a[np.triu_indices(n, 1)])))


def _violation(profile: DepthProfile, depth: int, bound: str, value: float, limit: float) -> None:
    entry = {"L": depth, "bound": bound, "value": float(value), "limit": float(limit)}
    log.warning("%s profile violates %s at L=%d: %.6g vs %.6g", profile.kind, bound, depth, value, limit)
    profile.issues.append(entry)


def _skip_bounds(d: DualActivation) -> bool:
    if d.linear or d.mu <= 0.0:
        log.info("activation %s is linear; bounds skipped (mu = 0)", d.name)
        return True
    return False


def verify_top_layer(K: GramMatrix, d: DualActivation, L_max: int, threads: Optional[int] = None) -> DepthProfile:
    """Top-layer kernel at depths 0..L_max against the separation and non-singularity bounds."""
    if L_max < 0:
        raise DomainError("L_max must be non-negative", {"L_max": L_max})
    delta_sep, delta_ns = _deltas(K)
    skip = _skip_bounds(d)
    mu = 0.0 if skip else d.mu
    params = None if skip else bounds.depth_thresholds(mu, delta_sep, K.n)
    profile = DepthProfile("toplayer", d.name, K.n, delta_sep, delta_ns, mu, not skip, params)

    with timed(log, f"top-layer profile ({d.name}, n={K.n}, L<={L_max})"):
        kernels = propagate_trace(K, d, L_max)
        spectra = _spectra([np.asarray(k.entries) for k in kernels], threads)

    for depth, (k, eig) in enumerate(zip(kernels, spectra)):
        a = np.asarray(k.entries)
        rec = DepthRecord(depth, _max_off(a), eig.lambda_min, eig.lambda_max, eig.kappa)
        gersh = gershgorin_check(k, eig)
        for issue in gersh["issues"]:
            _violation(profile, depth, "gershgorin_" + issue["bound"], issue["value"], issue["limit"])
        if not skip:
            rec.bound_b = bounds.bound_B(mu, depth, delta_sep)
            if rec.max_off_diag > rec.bound_b + BOUND_TOL:
                _violation(profile, depth, "max_off_diag", rec.max_off_diag, rec.bound_b)
            rec.bound_kappa = _nan(bounds.top_layer_kappa_bound(mu, delta_sep, K.n, depth))
            if not math.isnan(rec.bound_kappa) and not rec.kappa <= rec.bound_kappa * (1 + BOUND_TOL):
                _violation(profile, depth, "kappa_separation", rec.kappa, rec.bound_kappa)
            if delta_ns > 0.0:
                rec.bound_lambda_min = 1.0 - bounds.bound_B(mu, depth, delta_ns)
                if rec.lambda_min < rec.bound_lambda_min - BOUND_TOL:
                    _violation(profile, depth, "lambda_min", rec.lambda_min, rec.bound_lambda_min)
                rec.bound_kappa_stronger = bounds.top_layer_kappa_bound_stronger(mu, delta_ns, K.n, depth)
                if not rec.kappa <= rec.bound_kappa_stronger * (1 + BOUND_TOL):
                    _violation(profile, depth, "kappa_nonsingular", rec.kappa, rec.bound_kappa_stronger)
        profile.records.append(rec)
    return profile


def verify_ntk(K: GramMatrix, d: DualActivation, L_max: int, threads: Optional[int] = None) -> DepthProfile:
    """NTK at depths 0..L_max, every measured quantity divided by the common diagonal K_11."""
    if L_max < 0:
        raise DomainError("L_max must be non-negative", {"L_max": L_max})
    delta_sep, delta_ns = _deltas(K)
    skip = _skip_bounds(d)
    mu = 0.0 if skip else d.mu
    params = None if skip else bounds.depth_thresholds(mu, delta_sep, K.n)
    profile = DepthProfile("ntk", d.name, K.n, delta_sep, delta_ns, mu, not skip, params)

    with timed(log, f"ntk profile ({d.name}, n={K.n}, L<={L_max})"):
        kernels = [ntk_matrix(K, d, depth) for depth in range(L_max + 1)]
        normalized = [np.asarray(k.entries) / k.entries[0, 0] for k in kernels]
        spectra = _spectra(normalized, threads)

    for depth, (k, a, eig) in enumerate(zip(kernels, normalized, spectra)):
        diag = np.diag(np.asarray(k.entries))
        spread = float(diag.max() - diag.min())
        if spread > DIAGONAL_TOL:
            _violation(profile, depth, "diagonal_homogeneity", spread, DIAGONAL_TOL)
        rec = DepthRecord(depth, _max_off(a), eig.lambda_min, eig.lambda_max, eig.kappa, diagonal=float(diag[0]))
        gersh = gershgorin_check(GramMatrix(entries=a, unit_diagonal=False), eig)
        for issue in gersh["issues"]:
            _violation(profile, depth, "gershgorin_" + issue["bound"], issue["value"], issue["limit"])
        if not skip:
            rec.bound_b = _nan(bounds.ntk_offdiag_bound(mu, delta_sep, depth))
            if not math.isnan(rec.bound_b) and rec.max_off_diag > rec.bound_b + BOUND_TOL:
                _violation(profile, depth, "max_off_diag", rec.max_off_diag, rec.bound_b)
            rec.bound_kappa = _nan(bounds.ntk_kappa_bound(mu, delta_sep, K.n, depth))
            if not math.isnan(rec.bound_kappa) and not rec.kappa <= rec.bound_kappa * (1 + BOUND_TOL):
                _violation(profile, depth, "kappa_separation", rec.kappa, rec.bound_kappa)
            if delta_ns > 0.0:
                rec.bound_lambda_min = _nan(bounds.ntk_lambda_min_bound(mu, delta_ns, depth))
                if not math.isnan(rec.bound_lambda_min) and rec.lambda_min < rec.bound_lambda_min - BOUND_TOL:
                    _violation(profile, depth, "lambda_min", rec.lambda_min, rec.bound_lambda_min)
                rec.bound_kappa_stronger = _nan(bounds.ntk_kappa_bound_stronger(mu, delta_ns, K.n, depth))
                if not math.isnan(rec.bound_kappa_stronger) and not rec.kappa <= rec.bound_kappa_stronger * (1 + BOUND_TOL):
                    _violation(profile, depth, "kappa_nonsingular", rec.kappa, rec.bound_kappa_stronger)
        profile.records.append(rec)
    return profile
