"""Greedy correlation clustering of predictors.

Partitions {0..p-1} into an "independent" group G0 and K correlated
groups G1..GK. Seeds are the variables a base learner selects on the
full data, visited in ascending index order. Each seed grows its group
by repeatedly absorbing the remaining variable with the highest median
absolute correlation to the current members, while that median stays at
or above rho0. A group is committed only if it reaches size >= 2;
otherwise the seed stays in the pool and ends up in G0.

Two ablation constructors exist alongside: a random reassignment that
preserves the group sizes of a template, and the trivial single-group
partition.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import Dataset, correlation_matrix
from .seeding import SeedStream
from .solvers import BaseLearner

MODE_CORRELATION = "correlation"
MODE_RANDOM = "random"
MODE_NONE = "none"


@dataclass(frozen=True)
class Clustering:
    """A partition [G0, G1, ..., GK] of the column indices.

    G0 may be empty; every committed group Gk (k >= 1) has >= 2 members.
    `audit` records, for each committed group, the (variable, median
    absolute correlation at the moment of addition) pairs in addition
    order; the seed comes first with correlation nan.
    """

    groups: tuple
    rho0: float
    mode: str
    audit: tuple = field(default=(), repr=False)

    def __post_init__(self):
        seen = np.concatenate([np.asarray(g, dtype=np.int64) for g in self.groups])
        p = seen.size
        if p == 0 or not np.array_equal(np.sort(seen), np.arange(p)):
            raise ValueError("groups must partition 0..p-1")
        for g in self.groups[1:]:
            if len(g) < 2:
                raise ValueError("committed groups need at least 2 members")
        if self.mode not in (MODE_CORRELATION, MODE_RANDOM, MODE_NONE):
            raise ValueError(f"unknown mode {self.mode!r}")

    @property
    def k_count(self) -> int:
        return len(self.groups) - 1

    @property
    def p(self) -> int:
        return sum(len(g) for g in self.groups)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "rho0": self.rho0,
            "k_count": self.k_count,
            "groups": [np.asarray(g).tolist() for g in self.groups],
        }


def _median_abs_corr(corr: np.ndarray, j: int, members: list) -> float:
    # median of |corr(j, g)| over current members; even count averages
    # the two central order statistics (plain median)
    vals = np.abs(corr[j, members])
    return float(np.median(vals))


def median_abs_correlation(dataset: Dataset, candidate: int, group) -> float:
    """Median over the group of |corr(x_candidate, x_g)|.

    The affinity score the greedy growth maximises; exposed so the
    audit trail can be checked externally.
    """
    members = [int(g) for g in group]
    if not members:
        raise ValueError("group must be nonempty")
    if int(candidate) in members:
        raise ValueError("candidate already belongs to the group")
    cols = members + [int(candidate)]
    corr = correlation_matrix(dataset.x[:, cols])
    return _median_abs_corr(corr, len(members), list(range(len(members))))


def cluster_from_support(corr: np.ndarray, support: np.ndarray, rho0: float) -> Clustering:
    """Greedy growth from a precomputed correlation matrix and seed set.

    The deterministic core of `correlation_cluster`, split out so a
    caller that already ran the base learner (and owns the correlation
    matrix) does not pay for a second fit.
    """
    if not (0.0 < rho0 <= 1.0):
        raise ValueError("rho0 must be in (0, 1]")
    p = corr.shape[0]
    in_pool = np.ones(p, dtype=bool)      # R: not yet in a committed group
    committed = []
    audits = []
    for s in np.sort(np.asarray(support, dtype=np.int64)):
        if not in_pool[s]:
            continue  # absorbed by an earlier group
        members = [int(s)]
        in_group = np.zeros(p, dtype=bool)
        in_group[s] = True
        audit = [(int(s), float("nan"))]
        while True:
            best = -1
            best_rho = -np.inf
            for j in range(p):
                if not in_pool[j] or in_group[j]:
                    continue
                rho_j = _median_abs_corr(corr, j, members)
                if rho_j > best_rho:  # strict: ties keep the lowest index
                    best = j
                    best_rho = rho_j
            if best < 0 or best_rho < rho0:
                break
            members.append(best)
            in_group[best] = True
            audit.append((best, best_rho))
        if len(members) >= 2:
            in_pool[in_group] = False
            committed.append(np.array(members, dtype=np.int64))
            audits.append(tuple(audit))
        # a stalled singleton leaves its seed in the pool
    g0 = np.flatnonzero(in_pool).astype(np.int64)
    groups = (g0,) + tuple(np.sort(g) for g in committed)
    return Clustering(groups=groups, rho0=rho0, mode=MODE_CORRELATION,
                      audit=tuple(audits))


def correlation_cluster(dataset: Dataset, base_learner: BaseLearner = None,
                        rho0: float = 0.5,
                        seed: SeedStream = SeedStream(0)) -> Clustering:
    """Cluster a dataset's predictors, seeded by a base-learner fit.

    Parameters
    ----------
    dataset : Dataset
    base_learner : BaseLearner, default CV-tuned lasso
    rho0 : float
        Median-absolute-correlation threshold for growth, in (0, 1].
    seed : SeedStream
        Drives the base learner's CV split.
    """
    if base_learner is None:
        base_learner = BaseLearner()
    beta, _ = base_learner.cv_fit(dataset.x, dataset.y, seed)
    corr = correlation_matrix(dataset.x)
    return cluster_from_support(corr, np.flatnonzero(beta), rho0)


def random_cluster(template: Clustering, seed: SeedStream) -> Clustering:
    """Random membership with the template's group sizes.

    A uniform permutation of all variables is dealt into slots of the
    same sizes [|G0|, |G1|, ...]; K and the size multiset are preserved
    exactly, membership is scrambled.
    """
    p = template.p
    rng = seed.generator()
    perm = rng.permutation(p)
    groups = []
    at = 0
    for g in template.groups:
        size = len(g)
        groups.append(np.sort(perm[at:at + size]).astype(np.int64))
        at += size
    return Clustering(groups=tuple(groups), rho0=template.rho0, mode=MODE_RANDOM)


def no_cluster(p: int) -> Clustering:
    """Everything in G0; the subsampler sees one big group."""
    if p < 1:
        raise ValueError("p must be >= 1")
    return Clustering(groups=(np.arange(p, dtype=np.int64),), rho0=1.0,
                      mode=MODE_NONE)
