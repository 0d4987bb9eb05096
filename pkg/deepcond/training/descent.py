"""
Top-layer training with the square loss L(w) = (1/n) sum_i (a_i . w - y_i)^2.

Only the output weights move; the design A (rows a_i) is fixed, either
finite-width features of a sampled network or a factor of the
infinite-width kernel.

Public API:
- RegressionProblem, TrainRun
- gd_top_layer(problem, eta=None, T=100, w0=None) -> TrainRun
- sgd_top_layer(problem, seed, eps, w0=None) -> TrainRun
- top_layer_problem(net, X, y) -> RegressionProblem
- kernel_problem(K, y) -> RegressionProblem
- depth_helps_optimization(spec, n, delta, seed, loss_target=1e-6) -> dict
- TRAIN_COLUMNS
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
import scipy.linalg

from deepcond.conditioning.bounds import depth_thresholds
from deepcond.conditioning.kernels import GramMatrix, gram_from_inputs, propagate_kernel, separation_delta, spectrum
from deepcond.conditioning.synthetic import synthetic_unit_inputs
from deepcond.dual.activations import ActivationSpec
from deepcond.dual.duals import dual_activation
from deepcond.errors import DomainError, ResourceError
from deepcond.montecarlo.network import NetworkSample, features
from deepcond.montecarlo.rng import stream
from deepcond.runtime.logging import timed

log = logging.getLogger("deepcond.training")

LABEL_TOL = 1e-12
SINGULAR_TOL = 1e-12
RATE_SLACK = 1e-9
MAX_SGD_STEPS = 10_000_000
MAX_GD_STEPS = 100_000

TRAIN_COLUMNS = ["iteration", "loss", "rateBound"]


@dataclass(frozen=True, eq=False)
class RegressionProblem:
    design: np.ndarray
    labels: np.ndarray

    def __post_init__(self) -> None:
        a = np.atleast_2d(np.asarray(self.design, dtype=float))
        y = np.asarray(self.labels, dtype=float).ravel()
        if a.shape[0] != y.size:
            raise DomainError("design rows and labels differ in count", {"rows": a.shape[0], "labels": y.size})
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(y))):
            raise DomainError("design and labels must be finite")
        if y.size and np.max(np.abs(y)) > 1.0 + LABEL_TOL:
            raise DomainError("labels must lie in [-1, 1]", {"max_abs_label": float(np.max(np.abs(y)))})
        object.__setattr__(self, "design", a)
        object.__setattr__(self, "labels", y)

    @property
    def n(self) -> int:
        return self.design.shape[0]

    @property
    def p(self) -> int:
        return self.design.shape[1]

    def loss(self, w: np.ndarray) -> float:
        r = self.design @ w - self.labels
        return float(r @ r) / self.n

    def gradient(self, w: np.ndarray) -> np.ndarray:
        return (2.0 / self.n) * (self.design.T @ (self.design @ w - self.labels))

    @property
    def beta(self) -> float:
        """Largest squared row norm."""
        return float(np.max(np.einsum("ij,ij->i", self.design, self.design)))


@dataclass
class TrainRun:
    method: str
    step_size: float
    iterations: int
    losses: List[float]
    kappa: float
    lambda_min: float
    lambda_max: float
    rate_bound: List[Optional[float]] = field(default_factory=list)
    steps_per_point: int = 1
    details: Dict[str, Any] = field(default_factory=dict)
    issues: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues

    def rows(self) -> List[List[float]]:
        out = []
        for k, loss in enumerate(self.losses):
            bound = self.rate_bound[k] if k < len(self.rate_bound) else None
            out.append([k * self.steps_per_point, loss, float("nan") if bound is None else bound])
        return out

    def steps_to(self, target: float) -> Optional[int]:
        k = next((k for k, v in enumerate(self.losses) if v <= target), None)
        return None if k is None else k * self.steps_per_point


def _gram_spectrum(problem: RegressionProblem):
    """Eigenvalues of A A^T; a singular Gram means zero loss may be out of reach."""
    if problem.p < problem.n:
        raise DomainError("fewer features than samples: the Gram is singular, deepen or widen the network",
                          {"n": problem.n, "p": problem.p})
    eig = spectrum(problem.design @ problem.design.T)
    if eig.lambda_min <= SINGULAR_TOL * max(eig.lambda_max, 1.0):
        raise DomainError("singular feature Gram: deepen the network to separate the inputs",
                          {"lambda_min": eig.lambda_min, "lambda_max": eig.lambda_max})
    return eig


def _start(problem: RegressionProblem, w0) -> np.ndarray:
    if w0 is None:
        return np.zeros(problem.p)
    w = np.asarray(w0, dtype=float).ravel()
    if w.size != problem.p:
        raise DomainError("initial weights have the wrong size", {"expected": problem.p, "got": w.size})
    return w.copy()


# ==================================
# Gradient descent
# ==================================
def gd_top_layer(problem: RegressionProblem, eta: Optional[float] = None, T: int = 100,
                 w0=None) -> TrainRun:
    """Full-batch gradient descent with the envelope L(w_t) <= exp(-t/(4 kappa)) L(w_0).

    The default step 2/(h_min + h_max) uses the Hessian (2/n) A^T A, i.e.
    eta = n / (lambda_min + lambda_max) in terms of the Gram A A^T.
    """
    if T < 1:
        raise DomainError("T must be positive", {"T": T})
    eig = _gram_spectrum(problem)
    lo, hi, kappa = eig.lambda_min, eig.lambda_max, eig.kappa
    if eta is None:
        eta = problem.n / (lo + hi)
    if not eta > 0:
        raise DomainError("step size must be positive", {"eta": eta})
    w = _start(problem, w0)
    losses = [problem.loss(w)]
    with timed(log, f"gd n={problem.n} p={problem.p} T={T}"):
        for _ in range(T):
            w = w - eta * problem.gradient(w)
            losses.append(problem.loss(w))
    run = TrainRun("gd", float(eta), T, losses, kappa, lo, hi)
    run.details["weights_norm"] = float(np.linalg.norm(w))
    for t, loss in enumerate(losses):
        bound = math.exp(-t / (4.0 * kappa)) * losses[0]
        run.rate_bound.append(bound)
        if loss > bound + RATE_SLACK:
            log.warning("gd step %d above the rate envelope: %.6g vs %.6g", t, loss, bound)
            run.issues.append({"iteration": t, "bound": "rate_envelope", "value": loss, "limit": bound})
    if eta <= problem.n / (2.0 * hi):
        for t in range(1, len(losses)):
            if losses[t] > losses[t - 1] * (1 + 1e-12) + 1e-15:
                run.issues.append({"iteration": t, "bound": "monotone", "value": losses[t], "limit": losses[t - 1]})
    return run


# ==================================
# Stochastic gradient descent
# ==================================
def sgd_top_layer(problem: RegressionProblem, seed: int, eps: float, w0=None) -> TrainRun:
    """SGD with eta = 1/(2 beta), epochs of ceil(8 n beta / lambda_min) steps.

    Each epoch restarts from the average of its iterates, which halves the
    expected loss; ceil(log2(L(w_0)/eps)) epochs reach eps in expectation.
    `details["theorem_steps"]` is that step count, which is also the number
    of steps run, and `details["loss_at_theorem_steps"]` the loss there.
    Indices are drawn from stream (seed, 0, 0).
    """
    if not eps > 0:
        raise DomainError("eps must be positive", {"eps": eps})
    eig = _gram_spectrum(problem)
    beta = problem.beta
    eta = 1.0 / (2.0 * beta)
    epoch = int(math.ceil(8.0 * problem.n * beta / eig.lambda_min))
    w = _start(problem, w0)
    start_loss = problem.loss(w)
    epochs = max(int(math.ceil(math.log2(start_loss / eps))), 0) if start_loss > 0 else 0
    if epoch * epochs > MAX_SGD_STEPS:
        raise ResourceError("SGD step count exceeds the budget",
                            {"steps": epoch * epochs, "budget": MAX_SGD_STEPS})
    rng = stream(seed, 0, 0)
    A, y = problem.design, problem.labels
    losses = [start_loss]
    with timed(log, f"sgd n={problem.n} epochs={epochs} epoch_len={epoch}"):
        for _ in range(epochs):
            idx = rng.integers(0, problem.n, size=epoch)
            total = np.zeros_like(w)
            for i in idx:
                total += w
                a = A[i]
                w = w - eta * 2.0 * (a @ w - y[i]) * a
            w = total / epoch
            losses.append(problem.loss(w))
    run = TrainRun("sgd", eta, epoch * epochs, losses, eig.kappa, eig.lambda_min, eig.lambda_max,
                   steps_per_point=epoch)
    run.rate_bound = [start_loss * 0.5 ** k for k in range(epochs + 1)]
    run.details.update({
        "beta": beta,
        "epoch_length": epoch,
        "epochs": epochs,
        "eps": eps,
        "theorem_steps": epoch * epochs,
        "loss_at_theorem_steps": losses[epochs],
        "final_loss": losses[-1],
    })
    return run


# ==================================
# Problem builders
# ==================================
def top_layer_problem(net: NetworkSample, X, y) -> RegressionProblem:
    return RegressionProblem(design=features(net, X), labels=y)


def kernel_problem(K: GramMatrix, y) -> RegressionProblem:
    """Design A with A A^T = K (Cholesky), the infinite-width top layer."""
    try:
        a = scipy.linalg.cholesky(np.asarray(K.entries), lower=True)
    except np.linalg.LinAlgError as exc:
        raise DomainError("kernel is not positive definite: deepen the network", {"reason": str(exc)}) from exc
    return RegressionProblem(design=a, labels=y)


def _gd_until(problem: RegressionProblem, target: float) -> TrainRun:
    run = gd_top_layer(problem, T=1)
    steps = 1
    while run.losses[-1] > target and steps < MAX_GD_STEPS:
        steps = min(steps * 4, MAX_GD_STEPS)
        run = gd_top_layer(problem, T=steps)
    return run


def depth_helps_optimization(spec: ActivationSpec, n: int, delta: float, seed: int,
                             loss_target: float = 1e-6) -> Dict[str, Any]:
    """kappa and GD steps to loss_target at depth 1 against depth L1(delta)."""
    d = dual_activation(spec)
    if d.mu <= 0.0:
        raise DomainError("depth cannot help a linear activation", {"activation": spec.name})
    x = synthetic_unit_inputs(n, delta, seed)
    K = gram_from_inputs(x)
    delta_sep, _ = separation_delta(K)
    l1 = depth_thresholds(d.mu, delta_sep, n).l1
    y = np.where(stream(seed, 0, 2).random(n) < 0.5, -1.0, 1.0)
    out: Dict[str, Any] = {"activation": spec.name, "n": n, "delta": delta_sep, "L1": l1, "depths": []}
    for depth in (1, l1):
        run = _gd_until(kernel_problem(propagate_kernel(K, d, depth), y), loss_target)
        out["depths"].append({"L": depth, "kappa": run.kappa, "steps": run.steps_to(loss_target)})
    shallow, deep = out["depths"]
    ordered_steps = deep["steps"] is not None and (shallow["steps"] is None or deep["steps"] <= shallow["steps"])
    out["ok"] = deep["kappa"] <= shallow["kappa"] * (1 + 1e-12) and ordered_steps
    if not out["ok"]:
        log.warning("depth %d did not improve on depth 1: %s", l1, out["depths"])
    return out
