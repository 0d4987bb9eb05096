"""
Subcommand implementations. Each takes a resolved RunConfig and returns a
CommandResult; writing it out is left to deepcond.cli.main.

Public API:
- CommandResult
- cmd_dual_table(cfg) / cmd_profile(cfg) / cmd_simulate(cfg) / cmd_train(cfg) / cmd_normrelu(cfg)
- COMMANDS
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List

import numpy as np

from deepcond.conditioning import (
    PROFILE_COLUMNS,
    GramMatrix,
    depth_thresholds,
    gram_from_inputs,
    propagate_kernel,
    separation_delta,
    synthetic_unit_inputs,
    verify_ntk,
    verify_top_layer,
)
from deepcond.dual import (
    dual_activation,
    dual_eval,
    get_activation,
    normrelu_bias,
    normrelu_constants,
    normrelu_theorem_constants,
)
from deepcond.errors import DomainError, UsageError
from deepcond.montecarlo import (
    NetworkConfig,
    bn_invariance_check,
    correlation_decay_experiment,
    kernel_concentration,
    ntk_concentration,
    one_layer_min_singular_experiment,
    sample_layer_features,
    stream,
    unit_rows,
)
from deepcond.runtime.config import RunConfig
from deepcond.runtime.state import read_matrix
from deepcond.training import (
    RISK_COLUMNS,
    TRAIN_COLUMNS,
    RegressionProblem,
    excess_risk_estimate,
    gd_top_layer,
    min_norm_interpolator,
    sgd_top_layer,
)

log = logging.getLogger("deepcond.cli")

BN_BATCH = 16
TREND_GATE = 2.0


@dataclass
class CommandResult:
    ok: bool
    columns: List[str]
    rows: List[List[Any]]
    summary: Dict[str, Any] = field(default_factory=dict)


# ==================================
# dual-table
# ==================================
def cmd_dual_table(cfg: RunConfig) -> CommandResult:
    names = cfg["activations"]
    if not names:
        raise UsageError("no activations given")
    if cfg["rho_points"] < 2:
        raise UsageError("rho_points must be at least 2", {"rho_points": cfg["rho_points"]})
    grid = np.linspace(-1.0, 1.0, cfg["rho_points"])
    rows: List[List[Any]] = []
    summary: Dict[str, Any] = {}
    for name in names:
        d = dual_activation(get_activation(name))
        values = np.asarray(dual_eval(d, grid), dtype=float)
        summary[name] = {"mu": d.mu, "mu_tilde": d.mu_tilde}
        rows.extend([name, float(r), float(v), d.mu, d.mu_tilde] for r, v in zip(grid, values))
    return CommandResult(True, ["activation", "rho", "sigmaHat", "mu", "muTilde"], rows, {"activations": summary})


# ==================================
# profile
# ==================================
def _input_gram(cfg: RunConfig) -> GramMatrix:
    if cfg["gram"]:
        return GramMatrix.from_entries(read_matrix(cfg["gram"]))
    if cfg["inputs"]:
        return gram_from_inputs(read_matrix(cfg["inputs"]))
    if not cfg["synthetic"]:
        raise UsageError("profile needs --gram, --inputs or --synthetic")
    n, delta, seed = cfg["synthetic"]
    return gram_from_inputs(synthetic_unit_inputs(n, delta, seed))


def cmd_profile(cfg: RunConfig) -> CommandResult:
    K = _input_gram(cfg)
    d = dual_activation(get_activation(cfg["activation"]))
    verify = verify_top_layer if cfg["kind"] == "toplayer" else verify_ntk
    profile = verify(K, d, cfg["L_max"], threads=cfg.threads)
    summary = profile.summary()
    summary["verdict"] = f"bounds-respected={'true' if profile.ok else 'false'}"
    return CommandResult(profile.ok, list(PROFILE_COLUMNS), [r.row() for r in profile.records], summary)


# ==================================
# simulate
# ==================================
def _pair(rho: float) -> np.ndarray:
    if not -1.0 <= rho <= 1.0:
        raise DomainError("rho must lie in [-1, 1]", {"rho": rho})
    return np.array([[1.0, 0.0], [rho, math.sqrt(1.0 - rho * rho)]])


def cmd_simulate(cfg: RunConfig) -> CommandResult:
    spec = get_activation(cfg["activation"])
    widths, n, seed, trials = cfg["m"], cfg["n"][0], cfg.seed, cfg["trials"]
    experiment = cfg["experiment"]
    if not widths:
        raise UsageError("no widths given")

    if experiment == "kernel":
        x = synthetic_unit_inputs(n, cfg["delta"], seed)
        net = NetworkConfig(input_dim=x.shape[1], width=max(widths), depth=cfg["L"], activation=spec, seed=seed)
        out = kernel_concentration(net, x, trials, widths, threads=cfg.threads)
        errors = [r["mean_abs_error"] for r in out]
        ok = all(b < a for a, b in zip(errors, errors[1:]))
        rows = [[r["width"], r["mean_abs_error"], r["std_error"], r["trials"]] for r in out]
        return CommandResult(ok, ["width", "meanAbsError", "stdError", "trials"], rows, {"experiment": experiment})

    if experiment == "ntk":
        x = synthetic_unit_inputs(n, cfg["delta"], seed)
        net = NetworkConfig(input_dim=x.shape[1], width=widths[0], depth=cfg["L"], activation=spec, seed=seed)
        out = ntk_concentration(net, x, trials, threads=cfg.threads)
        mean, se = np.asarray(out["summary"]["mean"]), np.asarray(out["summary"]["stdError"])
        target = np.asarray(out["target"])
        rows = [[i, j, mean[i, j], se[i, j], target[i, j]] for i in range(n) for j in range(i, n)]
        return CommandResult(out["ok"], ["i", "j", "mean", "stdError", "target"], rows,
                             {"experiment": experiment, "issues": out["issues"]})

    if experiment == "decay":
        pair = _pair(cfg["rho"])
        net = NetworkConfig(input_dim=2, width=widths[0], depth=cfg["L"], activation=spec,
                            normalize_layers=True, seed=seed)
        out = correlation_decay_experiment(net, pair[0], pair[1], trials, threads=cfg.threads)
        mean, se = out["summary"]["mean"], out["summary"]["stdError"]
        rows = [[h, mean[h], se[h], out["bound"][h]] for h in range(cfg["L"] + 1)]
        summary = {k: out[k] for k in ("rho0", "delta", "mu", "l0", "fitted_rate", "reference_rate", "issues")}
        return CommandResult(out["ok"], ["L", "meanRho", "stdError", "boundB"], rows,
                             {"experiment": experiment, **summary})

    if experiment == "sigma-min":
        out = one_layer_min_singular_experiment(n, widths[0], cfg["delta"], trials, seed, threads=cfg.threads)
        s = out["summary"]
        rows = [[out["n"], out["width"], out["delta"], out["sigma_min"], s["mean"], s["stdError"],
                 out["reference"], out["ratio"]]]
        return CommandResult(out["ok"], ["n", "width", "delta", "sigmaMin", "mean", "stdError", "reference", "ratio"],
                             rows, {"experiment": experiment})

    # bn-invariance
    m = widths[0]
    batch = stream(seed, 0, 0).standard_normal((BN_BATCH, m))
    w = stream(seed, 0, 1).standard_normal(m)
    out = bn_invariance_check(spec, batch, w)
    rows = [[spec.name, out["bn_max_abs_deviation"], out["ln_max_abs_deviation"], out["max_abs_deviation"]]]
    return CommandResult(out["ok"], ["activation", "bnMaxAbsDeviation", "lnMaxAbsDeviation", "maxAbsDeviation"],
                         rows, {"experiment": experiment})


# ==================================
# train
# ==================================
def _labels(kind: str, x: np.ndarray, seed: int) -> np.ndarray:
    if kind == "zeros":
        return np.zeros(x.shape[0])
    if kind == "noise":
        return stream(seed, 0, 2).uniform(-1.0, 1.0, size=x.shape[0])
    target = unit_rows(stream(seed, 0, 3), 1, x.shape[1])[0]
    return x @ target


def _depth(cfg: RunConfig, d, x: np.ndarray) -> int:
    if cfg["depth"] != "L1":
        return cfg["depth"]
    if d.mu <= 0.0:
        raise UsageError("depth L1 needs a nonlinear activation", {"activation": d.name})
    delta, _ = separation_delta(gram_from_inputs(x))
    return depth_thresholds(d.mu, delta, x.shape[0]).l1


def cmd_train(cfg: RunConfig) -> CommandResult:
    spec = get_activation(cfg["activation"])
    seed, mode = cfg.seed, cfg["mode"]

    if mode == "risk":
        depth = None if cfg["depth"] == "L1" else cfg["depth"]
        results = [excess_risk_estimate(spec, depth, n, cfg["n_test"], cfg["labels"], seed, cfg["dim"])
                   for n in cfg["n"]]
        ok = all(b.excess_risk <= a.excess_risk + TREND_GATE * math.hypot(a.std_error, b.std_error)
                 for a, b in zip(results, results[1:]))
        return CommandResult(ok, list(RISK_COLUMNS), [r.row() for r in results], {"mode": mode})

    n = cfg["n"][0]
    x = synthetic_unit_inputs(n, cfg["delta"], seed)
    d = dual_activation(spec)
    depth = _depth(cfg, d, x)
    y = _labels(cfg["labels"], x, seed)

    if mode == "interpolate":
        fit = min_norm_interpolator(propagate_kernel(gram_from_inputs(x), d, depth), y)
        rows = [[i, y[i], fit.dual_weights[i], fit.residuals[i]] for i in range(n)]
        summary = {"mode": mode, "L": depth, "max_residual": fit.max_residual,
                   "norm_squared": fit.norm_squared, "kappa": fit.kappa}
        return CommandResult(fit.max_residual <= 1e-8, ["index", "label", "dualWeight", "residual"], rows, summary)

    net = NetworkConfig(input_dim=x.shape[1], width=cfg["width"], depth=depth, activation=spec,
                        normalize_layers=True, seed=seed)
    problem = RegressionProblem(design=sample_layer_features(net, x)[-1], labels=y)
    if mode == "gd":
        run = gd_top_layer(problem, T=cfg["T"])
        ok = run.ok
    else:
        run = sgd_top_layer(problem, seed, cfg["eps"])
        ok = run.losses[-1] <= cfg["eps"]
    summary = {"mode": mode, "L": depth, "kappa": run.kappa, "step_size": run.step_size,
               "iterations": run.iterations, "issues": run.issues, **run.details}
    summary["verdict"] = f"rate-envelope={'true' if ok else 'false'}"
    return CommandResult(ok, list(TRAIN_COLUMNS), run.rows(), summary)


# ==================================
# normrelu
# ==================================
def cmd_normrelu(cfg: RunConfig) -> CommandResult:
    c = cfg["c"]
    k = normrelu_constants(c)
    rows: List[List[Any]] = [["c", k.c], ["b", k.b], ["lambda", k.lam], ["mu", k.mu]]
    summary: Dict[str, Any] = {"c": c}
    try:
        t = normrelu_theorem_constants(c, cfg["eps"])
    except DomainError as exc:
        log.warning("no norm-contraction constants for c=%g: %s", c, exc.message)
        summary["theorem_constants"] = None
    else:
        rows += [
            ["alpha_minus", t.alpha_minus],
            ["alpha_plus", t.alpha_plus],
            ["alpha", t.alpha],
            ["delta_prime", t.delta_prime],
            ["L_hat", t.l_hat],
            ["bias_0.5", normrelu_bias(0.5, c)],
            ["bias_2", normrelu_bias(2.0, c)],
        ]
    return CommandResult(True, ["quantity", "value"], rows, summary)


COMMANDS: Dict[str, Callable[[RunConfig], CommandResult]] = {
    "dual-table": cmd_dual_table,
    "profile": cmd_profile,
    "simulate": cmd_simulate,
    "train": cmd_train,
    "normrelu": cmd_normrelu,
}
