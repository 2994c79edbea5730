"""Random-lasso baseline: two rounds of bootstrap-plus-subset lasso fits.

Step 1 repeats B times: bootstrap the rows, draw q1 candidate variables
uniformly, CV-fit a lasso on the re-standardized bootstrap sub-data,
and map the coefficients back to the outer scale. The importance of
variable j is |mean of its mapped coefficients| (zeros when not drawn).

Step 2 repeats B times with the candidate draw now weighted by
importance (without replacement, q2 variables); beta_raw is the plain
mean of the mapped coefficients over all B iterations. Variables with
|beta_raw_j| below the threshold (default 1/n) are zeroed.

(q1, q2) are picked jointly by K-fold CV over a coarse grid, scoring
the held-out squared error of the pre-threshold beta_raw fitted on the
training folds. Step 1 depends on q1 only, so each (fold, q1)
importance vector is computed once and shared across the q2 column.

Bootstrap resamples can be degenerate (a drawn column constant within
the resample, or a constant response). Those draws are redrawn, up to
`max_redraws` times, before giving up.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import standardize
from .errors import ConstantColumn, DegenerateBootstrap, DegenerateGrid
from .sampling import uniform_subset, weighted_subset
from .seeding import SeedStream
from .solvers import BaseLearner, cv_fold_ids

_Q_FRACTIONS = (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)

# seed-path constants
_K_FOLDS = 0
_K_CV_STEP1 = 1
_K_CV_STEP2 = 2
_K_FINAL = 3


def default_q_grid(p: int) -> np.ndarray:
    """Candidate-count grid: rounded fractions of p, deduplicated.

    Fractions rounding to zero are dropped (a 0-variable model cannot
    be fit), so for p >= 3 the smallest candidate count is round(0.2p),
    not 1. Mapping the zero fraction to q=1 instead would add a
    marginal-screening point (every fit a single-variable lasso) that
    the q-search tends to favour on strongly correlated designs,
    changing the character of the procedure.
    """
    q = np.rint(np.array(_Q_FRACTIONS) * p).astype(np.int64)
    q = q[q >= 1]
    return np.unique(q)


@dataclass(frozen=True)
class RandomLassoConfig:
    B: int = 300
    q1_grid: tuple | None = None  # None: default_q_grid(p)
    q2_grid: tuple | None = None
    threshold: float | None = None  # None: 1/n
    cv_folds: int = 5
    max_redraws: int = 100

    def __post_init__(self):
        if self.B < 1:
            raise ValueError("B must be >= 1")
        if self.cv_folds < 2:
            raise ValueError("cv_folds must be >= 2")
        if self.max_redraws < 0:
            raise ValueError("max_redraws must be >= 0")


@dataclass(frozen=True)
class RandomLassoResult:
    importance: np.ndarray
    beta_raw: np.ndarray
    beta_hat: np.ndarray
    q1_selected: int
    q2_selected: int
    threshold: float
    q1_grid: np.ndarray
    q2_grid: np.ndarray
    config: RandomLassoConfig
    cv_errors: np.ndarray = field(repr=False)  # (len(q1_grid), len(q2_grid))

    @property
    def selected(self) -> np.ndarray:
        return np.flatnonzero(self.beta_hat)


def _bootstrap_fit(x, y, q, weights, rng, cv_seed, learner, max_redraws):
    """One bootstrap resample, candidate draw, and CV lasso fit.

    Returns (beta on the outer scale already, columns drawn). Redraws
    the whole resample when the sub-data cannot be standardized or
    gives a flat response.
    """
    n, p = x.shape
    for _ in range(max_redraws + 1):
        rows = rng.integers(0, n, size=n)
        if weights is None:
            cols = uniform_subset(rng, np.arange(p), q)
        else:
            cols = np.sort(weighted_subset(rng, weights, q))
        try:
            sub = standardize(x[rows][:, cols], y[rows])
        except ConstantColumn:
            continue
        try:
            beta_tilde, _ = learner.cv_fit(sub.x, sub.y, cv_seed)
        except DegenerateGrid:
            continue
        return beta_tilde / sub.column_sds, cols
    raise DegenerateBootstrap(
        f"no usable bootstrap resample in {max_redraws + 1} attempts")


def rlasso_step1(x, y, q1, B, seed: SeedStream, learner, max_redraws):
    """Importance vector from B uniform-candidate bootstrap fits."""
    p = x.shape[1]
    beta_sum = np.zeros(p)
    for b in range(B):
        rng = seed.child(b, 0).generator()
        beta, cols = _bootstrap_fit(x, y, q1, None, rng, seed.child(b, 1),
                                    learner, max_redraws)
        beta_sum[cols] += beta
    return np.abs(beta_sum) / B


def rlasso_step2(x, y, importance, q2, B, seed: SeedStream, learner,
                 max_redraws):
    """Mean coefficient vector from B importance-weighted bootstrap fits.

    Variables with zero importance cannot be drawn; if fewer than q2
    have positive importance the draw size shrinks to that count, and
    with none at all the mean is identically zero.
    """
    p = x.shape[1]
    q = min(int(q2), int((importance > 0).sum()))
    beta_sum = np.zeros(p)
    if q > 0:
        for b in range(B):
            rng = seed.child(b, 0).generator()
            beta, cols = _bootstrap_fit(x, y, q, importance, rng,
                                        seed.child(b, 1), learner, max_redraws)
            beta_sum[cols] += beta
    return beta_sum / B


def _cv_select_q(x, y, q1_grid, q2_grid, config, learner, seed: SeedStream):
    """Joint grid search for (q1, q2) by pooled held-out squared error."""
    n = x.shape[0]
    fold_ids = cv_fold_ids(n, config.cv_folds, seed.child(_K_FOLDS).generator())
    errors = np.zeros((len(q1_grid), len(q2_grid)))
    for k in range(config.cv_folds):
        va = fold_ids == k
        tr = ~va
        x_tr, y_tr = x[tr], y[tr]
        x_va, y_va = x[va], y[va]
        for i, q1 in enumerate(q1_grid):
            importance = rlasso_step1(x_tr, y_tr, q1, config.B,
                                      seed.child(_K_CV_STEP1, k, i),
                                      learner, config.max_redraws)
            for j, q2 in enumerate(q2_grid):
                beta_raw = rlasso_step2(x_tr, y_tr, importance, q2, config.B,
                                        seed.child(_K_CV_STEP2, k, i, j),
                                        learner, config.max_redraws)
                resid = y_va - x_va @ beta_raw
                errors[i, j] += resid @ resid
    errors /= n
    best_i = best_j = 0
    best = np.inf
    for i in range(len(q1_grid)):  # row-major scan: ties keep smaller q1, q2
        for j in range(len(q2_grid)):
            if errors[i, j] < best:
                best = errors[i, j]
                best_i, best_j = i, j
    return int(q1_grid[best_i]), int(q2_grid[best_j]), errors


def rlasso_fit(dataset, config: RandomLassoConfig = RandomLassoConfig(),
               seed: SeedStream = SeedStream(0),
               learner: BaseLearner = None) -> RandomLassoResult:
    """Tune (q1, q2), run both steps on the full data, threshold."""
    if learner is None:
        learner = BaseLearner()
    x, y = dataset.x, dataset.y
    n, p = x.shape
    q1_grid = (np.asarray(config.q1_grid, dtype=np.int64)
               if config.q1_grid is not None else default_q_grid(p))
    q2_grid = (np.asarray(config.q2_grid, dtype=np.int64)
               if config.q2_grid is not None else default_q_grid(p))
    if q1_grid.min() < 1 or q1_grid.max() > p:
        raise ValueError("q1 grid entries must lie in [1, p]")
    if q2_grid.min() < 1 or q2_grid.max() > p:
        raise ValueError("q2 grid entries must lie in [1, p]")
    q1, q2, cv_errors = _cv_select_q(x, y, q1_grid, q2_grid, config,
                                     learner, seed)
    importance = rlasso_step1(x, y, q1, config.B, seed.child(_K_FINAL, 1),
                              learner, config.max_redraws)
    beta_raw = rlasso_step2(x, y, importance, q2, config.B,
                            seed.child(_K_FINAL, 2), learner,
                            config.max_redraws)
    threshold = config.threshold if config.threshold is not None else 1.0 / n
    beta_hat = np.where(np.abs(beta_raw) >= threshold, beta_raw, 0.0)
    return RandomLassoResult(
        importance=importance, beta_raw=beta_raw, beta_hat=beta_hat,
        q1_selected=q1, q2_selected=q2, threshold=threshold,
        q1_grid=q1_grid, q2_grid=q2_grid, config=config, cv_errors=cv_errors)
