"""Subset-drawing primitives shared by the ensembles."""

from __future__ import annotations

import numpy as np

from .errors import DegenerateWeights


def uniform_subset(rng: np.random.Generator, group: np.ndarray, size: int) -> np.ndarray:
    """`size` distinct members of `group`, uniformly, sorted ascending."""
    if size == 0:
        return np.empty(0, dtype=np.int64)
    return np.sort(rng.choice(group, size=size, replace=False)).astype(np.int64)


def weighted_subset(rng: np.random.Generator, weights: np.ndarray, size: int) -> np.ndarray:
    """Draw `size` indices without replacement, proportional to `weights`.

    Sequential scheme: each draw picks one index with probability
    weight/sum over the not-yet-drawn, then renormalises. Zero-weight
    indices can never be drawn.

    Raises
    ------
    DegenerateWeights
        If fewer than `size` indices have positive weight.
    """
    w = np.asarray(weights, dtype=np.float64)
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise DegenerateWeights("weights must be finite and nonnegative")
    alive = np.flatnonzero(w > 0)
    if size > alive.size:
        raise DegenerateWeights(f"need {size} positive-weight indices, have {alive.size}")
    if size == 0:
        return np.empty(0, dtype=np.int64)
    pool = alive.copy()
    w_pool = w[alive].copy()
    out = np.empty(size, dtype=np.int64)
    for t in range(size):
        cum = np.cumsum(w_pool)
        u = rng.random() * cum[-1]
        k = int(np.searchsorted(cum, u, side="right"))
        if k >= pool.size:  # guard the u == total edge
            k = pool.size - 1
        out[t] = pool[k]
        pool = np.delete(pool, k)
        w_pool = np.delete(w_pool, k)
    return out
