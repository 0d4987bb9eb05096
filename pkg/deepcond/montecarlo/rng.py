"""
Counter-based random streams.

A stream is addressed by (seed, trial, layer): the same address always yields
the same Philox generator, independent of thread scheduling or of which
other streams were consumed first.

Public API:
- stream(seed, trial=0, layer=0) -> numpy.random.Generator
- unit_rows(rng, n, d) -> ndarray
"""
from __future__ import annotations

import numpy as np

from deepcond.errors import DomainError

MAX_SEED = 2**64 - 1


def stream(seed: int, trial: int = 0, layer: int = 0) -> np.random.Generator:
    if not 0 <= int(seed) <= MAX_SEED:
        raise DomainError("seed must be a 64-bit unsigned integer", {"seed": seed})
    if trial < 0 or layer < 0:
        raise DomainError("stream indices must be non-negative", {"trial": trial, "layer": layer})
    seq = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(trial), int(layer)))
    return np.random.Generator(np.random.Philox(seq))


def unit_rows(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    """n rows drawn uniformly from the unit sphere in R^d."""
    g = rng.standard_normal((n, d))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    # a zero Gaussian draw has probability zero; redraw rather than divide by it
    while np.any(norms == 0):
        bad = norms[:, 0] == 0
        g[bad] = rng.standard_normal((int(bad.sum()), d))
        norms = np.linalg.norm(g, axis=1, keepdims=True)
    return g / norms
