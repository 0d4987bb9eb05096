"""
Finite-width fully-connected networks with i.i.d. standard normal weights.

    f_W(x) = v . h_L,   h_l = Pi((1/sqrt(m)) sigma(W_l h_{l-1})),   h_0 = x

Pi (unit-length projection per layer) is applied only when the config asks
for it. Layer l's weights come from stream (seed, trial, l) and v from
(seed, trial, 0), so each block is independent of the other layers' sizes.

Public API:
- NetworkConfig, NetworkSample, MEMORY_BUDGET, MAX_WIDTH
- sample_network(cfg, trial=0) -> NetworkSample
- project(H) -> ndarray
- features(net, X) / feature_map(net, x)
- network_output(net, X) -> ndarray
- empirical_kernel(net, X) -> GramMatrix
- empirical_ntk(net, X) -> GramMatrix
- parameter_vector(net) / replace_parameters(net, theta)
- finite_difference_ntk(net, X, h=1e-5) -> ndarray
- sample_layer_features(cfg, X, trial=0) -> list[ndarray]
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import List, Tuple

import numpy as np
import scipy.linalg

from deepcond.conditioning.kernels import GramMatrix
from deepcond.dual.activations import ActivationSpec
from deepcond.errors import ConfigurationError, DegenerateInputError, DomainError, ResourceError
from deepcond.montecarlo.rng import stream

log = logging.getLogger("deepcond.montecarlo")

MEMORY_BUDGET = 2**28  # float64 entries
MAX_WIDTH = 2**16
UNIT_TOL = 1e-9
# rows already at unit length pass through Pi unchanged, keeping it idempotent
PROJECTION_TOL = 1e-15


@dataclass(frozen=True)
class NetworkConfig:
    input_dim: int
    width: int
    depth: int
    activation: ActivationSpec
    normalize_layers: bool = False
    seed: int = 0

    def __post_init__(self) -> None:
        if self.input_dim < 1 or self.width < 1:
            raise ConfigurationError("input_dim and width must be positive",
                                     {"input_dim": self.input_dim, "width": self.width})
        if self.depth < 0:
            raise ConfigurationError("depth must be non-negative", {"depth": self.depth})
        if self.width > MAX_WIDTH:
            raise ConfigurationError(f"width above {MAX_WIDTH} is not supported", {"width": self.width})


@dataclass(frozen=True, eq=False)
class NetworkSample:
    config: NetworkConfig
    weights: Tuple[np.ndarray, ...]
    v: np.ndarray
    trial: int = 0


def _fan_in(cfg: NetworkConfig, layer: int) -> int:
    return cfg.input_dim if layer == 1 else cfg.width


def sample_network(cfg: NetworkConfig, trial: int = 0) -> NetworkSample:
    m, d, L = cfg.width, cfg.input_dim, cfg.depth
    size = (d * m + (L - 1) * m * m + m) if L > 0 else d
    if size > MEMORY_BUDGET:
        raise ResourceError("network weights exceed the memory budget",
                            {"floats": size, "budget": MEMORY_BUDGET})
    weights = []
    for layer in range(1, L + 1):
        w = stream(cfg.seed, trial, layer).standard_normal((m, _fan_in(cfg, layer)))
        w.setflags(write=False)
        weights.append(w)
    v = stream(cfg.seed, trial, 0).standard_normal(m if L > 0 else d)
    v.setflags(write=False)
    return NetworkSample(config=cfg, weights=tuple(weights), v=v, trial=trial)


def project(H: np.ndarray) -> np.ndarray:
    """Row-wise unit-length projection."""
    H = np.atleast_2d(H)
    norms = np.linalg.norm(H, axis=1, keepdims=True)
    if np.any(norms == 0.0):
        raise DegenerateInputError("zero representation reached the projection",
                                   {"rows": np.flatnonzero(norms[:, 0] == 0.0).tolist()})
    keep = np.abs(norms - 1.0) <= PROJECTION_TOL
    return np.where(keep, H, H / norms)


def _inputs(cfg: NetworkConfig, X, allow_general: bool = False) -> np.ndarray:
    x = np.atleast_2d(np.asarray(X, dtype=float))
    if x.shape[1] != cfg.input_dim:
        raise DomainError("input dimension mismatch", {"expected": cfg.input_dim, "got": x.shape[1]})
    if not allow_general:
        dev = float(np.max(np.abs(np.linalg.norm(x, axis=1) - 1.0)))
        if dev > UNIT_TOL:
            raise DomainError("inputs must have unit norm", {"max_deviation": dev})
    return x


def _forward(net: NetworkSample, x: np.ndarray):
    """Per-layer (g_l, u_l, h_l) with u_l the pre-projection output."""
    act = net.config.activation
    scale = 1.0 / np.sqrt(net.config.width)
    h = x
    cache = []
    for w in net.weights:
        g = h @ w.T
        u = act.evaluate(g) * scale
        h = project(u) if net.config.normalize_layers else u
        cache.append((g, u, h))
    return cache


def features(net: NetworkSample, X, allow_general: bool = False) -> np.ndarray:
    x = _inputs(net.config, X, allow_general)
    cache = _forward(net, x)
    return cache[-1][2] if cache else x.copy()


def feature_map(net: NetworkSample, x, allow_general: bool = False) -> np.ndarray:
    return features(net, np.asarray(x, dtype=float)[None, :], allow_general)[0]


def network_output(net: NetworkSample, X, allow_general: bool = False) -> np.ndarray:
    return features(net, X, allow_general) @ net.v


def empirical_kernel(net: NetworkSample, X) -> GramMatrix:
    F = features(net, X)
    return GramMatrix.from_entries(F @ F.T)


def empirical_ntk(net: NetworkSample, X) -> GramMatrix:
    """Sum over parameter blocks of Jacobian inner products, by a layer-wise backward pass."""
    cfg = net.config
    x = _inputs(cfg, X)
    n = x.shape[0]
    if n * cfg.width * max(cfg.depth, 1) > MEMORY_BUDGET:
        raise ResourceError("NTK activations exceed the memory budget",
                            {"floats": n * cfg.width * cfg.depth, "budget": MEMORY_BUDGET})
    cache = _forward(net, x)
    if not cache:
        k = x @ x.T
        return GramMatrix.from_entries((k + k.T) / 2.0, unit_diagonal=False)

    act = cfg.activation
    scale = 1.0 / np.sqrt(cfg.width)
    top = cache[-1][2]
    ntk = top @ top.T
    dh = np.tile(net.v, (n, 1))
    for layer in range(cfg.depth, 0, -1):
        g, u, h = cache[layer - 1]
        if cfg.normalize_layers:
            norms = np.linalg.norm(u, axis=1, keepdims=True)
            du = (dh - np.sum(dh * h, axis=1, keepdims=True) * h) / norms
        else:
            du = dh
        dg = du * act.differentiate(g) * scale
        below = cache[layer - 2][2] if layer > 1 else x
        ntk = ntk + (dg @ dg.T) * (below @ below.T)
        dh = dg @ net.weights[layer - 1]
    return GramMatrix.from_entries((ntk + ntk.T) / 2.0, unit_diagonal=False)


# ==================================
# Finite-difference oracle
# ==================================
def parameter_vector(net: NetworkSample) -> np.ndarray:
    return np.concatenate([w.ravel() for w in net.weights] + [net.v.ravel()])


def replace_parameters(net: NetworkSample, theta: np.ndarray) -> NetworkSample:
    theta = np.asarray(theta, dtype=float)
    if theta.size != parameter_vector(net).size:
        raise DomainError("parameter vector has the wrong size",
                          {"expected": parameter_vector(net).size, "got": theta.size})
    out, start = [], 0
    for w in net.weights:
        out.append(theta[start:start + w.size].reshape(w.shape))
        start += w.size
    return replace(net, weights=tuple(out), v=theta[start:].copy())


def finite_difference_ntk(net: NetworkSample, X, h: float = 1e-5) -> np.ndarray:
    """J J^T with J from central differences of the network output."""
    x = _inputs(net.config, X)
    theta = parameter_vector(net)
    jac = np.empty((x.shape[0], theta.size))
    for k in range(theta.size):
        step = np.zeros_like(theta)
        step[k] = h
        plus = network_output(replace_parameters(net, theta + step), x)
        minus = network_output(replace_parameters(net, theta - step), x)
        jac[:, k] = (plus - minus) / (2.0 * h)
    return jac @ jac.T


# ==================================
# Projected sampler
# ==================================
def _factor(c: np.ndarray) -> np.ndarray:
    """A with A A^T = C for a PSD Gram C (negative rounding eigenvalues clipped)."""
    vals, vecs = scipy.linalg.eigh((c + c.T) / 2.0)
    return vecs * np.sqrt(np.clip(vals, 0.0, None))


def sample_layer_features(cfg: NetworkConfig, X, trial: int = 0) -> List[np.ndarray]:
    """Representations h_0..h_L drawn exactly in law without materializing W.

    Given h_{l-1}, the pre-activations W_l h_{l-1} of the n inputs are m
    independent N(0, H H^T) vectors, so each layer costs O(n m) memory.
    """
    x = _inputs(cfg, X)
    n = x.shape[0]
    if n * cfg.width > MEMORY_BUDGET:
        raise ResourceError("layer features exceed the memory budget",
                            {"floats": n * cfg.width, "budget": MEMORY_BUDGET})
    scale = 1.0 / np.sqrt(cfg.width)
    h = x
    out = [x]
    for layer in range(1, cfg.depth + 1):
        a = _factor(h @ h.T)
        z = stream(cfg.seed, trial, layer).standard_normal((n, cfg.width))
        u = cfg.activation.evaluate(a @ z) * scale
        h = project(u) if cfg.normalize_layers else u
        out.append(h)
    return out
