"""Two-step subsampled ensemble selection (the STRD methods).

Step 0 clusters the predictors (see `cluster`). Step 1 runs B
iterations that subsample every group independently (subset size
uniform on {0..|G_k|}), fit the CV-tuned base learner on the union, and
accumulate per-variable evidence:

    m_j      times variable j was sampled
    alpha_j  mean |coefficient| over the iterations that sampled j
    theta_j  fraction of those iterations giving j a nonzero coefficient

Step 2 draws s_tilde = ceil(sum theta) variables without replacement
with probability proportional to alpha_j * theta_j, refits B times with
the penalty level tuned only over the pool of previously optimal
lambdas (the Step-0 winner plus every Step-1 winner), and averages:
beta_hat_j over all B iterations (zeros included) and the selection
probability pi_hat_j. The final model keeps the top s0_hat variables,
s0_hat = #{pi_hat >= pi_threshold}.

Restricting Step-2 tuning to previously optimal levels is the
screening-bias correction: after Step 1 has already looked at the data,
a free grid would systematically pick optimistic penalties.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cluster import (MODE_CORRELATION, MODE_NONE, MODE_RANDOM, Clustering,
                      cluster_from_support, no_cluster, random_cluster)
from .data import Dataset, correlation_matrix
from .errors import DegenerateGrid, EmptyEnsemble
from .sampling import uniform_subset, weighted_subset
from .seeding import SeedStream
from .solvers import BaseLearner

RANK_BY_PROBABILITY = "probability"
RANK_BY_COEFFICIENT = "coefficient"

# seed-path constants: child(_K_*, ...) namespaces the pipeline stages
_K_STEP0 = 0
_K_STEP1 = 1
_K_STEP2 = 2
_K_SHUFFLE = 3


@dataclass(frozen=True)
class StrandsConfig:
    B: int = 300
    rho0: float = 0.5
    pi_threshold: float = 0.5
    clustering_mode: str = MODE_CORRELATION
    rank_by: str = RANK_BY_PROBABILITY

    def __post_init__(self):
        if self.B < 1:
            raise ValueError("B must be >= 1")
        if not (0.0 < self.rho0 <= 1.0):
            raise ValueError("rho0 must be in (0, 1]")
        if not (0.0 <= self.pi_threshold <= 1.0):
            raise ValueError("pi_threshold must be in [0, 1]")
        if self.clustering_mode not in (MODE_CORRELATION, MODE_RANDOM, MODE_NONE):
            raise ValueError(f"unknown clustering_mode {self.clustering_mode!r}")
        if self.rank_by not in (RANK_BY_PROBABILITY, RANK_BY_COEFFICIENT):
            raise ValueError(f"unknown rank_by {self.rank_by!r}")


@dataclass(frozen=True)
class Step1Result:
    """Per-variable exploration evidence from Step 1."""

    m_counts: np.ndarray
    alpha: np.ndarray
    theta: np.ndarray
    lambdas: np.ndarray  # CV winners, one per non-degenerate iteration


@dataclass(frozen=True)
class StrandsResult:
    beta_hat: np.ndarray
    pi_hat: np.ndarray
    s0_hat: int
    selected: np.ndarray
    alpha: np.ndarray
    theta: np.ndarray
    m_counts: np.ndarray
    lambda_pool: np.ndarray
    s_tilde: int
    s_tilde_reduced: bool
    clustering: Clustering
    config: StrandsConfig
    step2_lambdas: np.ndarray = field(repr=False)

    def scored_coefficients(self) -> np.ndarray:
        """beta_hat restricted to the selected set (zeros elsewhere)."""
        out = np.zeros_like(self.beta_hat)
        out[self.selected] = self.beta_hat[self.selected]
        return out


def step1_subset(clustering: Clustering, seed: SeedStream, b: int) -> np.ndarray:
    """The columns iteration b would explore, sorted (possibly empty).

    For every group independently: a size uniform on {0..|G_k|}, then
    that many members uniformly without replacement, all from the
    iteration's own child(b, 0) stream.
    """
    rng = seed.child(b, 0).generator()
    parts = []
    for g in clustering.groups:
        size = int(rng.integers(0, len(g) + 1))
        if size:
            parts.append(uniform_subset(rng, np.asarray(g), size))
    if not parts:
        return np.empty(0, dtype=np.int64)
    return np.sort(np.concatenate(parts))


def step1_explore(dataset: Dataset, clustering: Clustering,
                  base_learner: BaseLearner, B: int,
                  seed: SeedStream) -> Step1Result:
    """B rounds of group-wise subsampling plus base-learner fits.

    Iteration b draws its columns via `step1_subset`. Empty unions are
    skipped (they still consume the iteration). A base-learner fit that
    degenerates (adaptive init selecting nothing) contributes zeros but
    still counts toward m_j.

    Raises
    ------
    EmptyEnsemble
        If all B iterations drew an empty union.
    """
    p = dataset.p
    m = np.zeros(p, dtype=np.int64)
    alpha_sum = np.zeros(p)
    theta_sum = np.zeros(p)
    lambdas = []
    fitted_any = False
    for b in range(B):
        cols = step1_subset(clustering, seed, b)
        if cols.size == 0:
            continue
        fitted_any = True
        m[cols] += 1
        try:
            beta_sub, lam = base_learner.cv_fit(
                dataset.x[:, cols], dataset.y, seed.child(b, 1))
        except DegenerateGrid:
            continue
        alpha_sum[cols] += np.abs(beta_sub)
        theta_sum[cols] += (beta_sub != 0.0)
        lambdas.append(lam)
    if not fitted_any:
        raise EmptyEnsemble(f"all {B} iterations sampled no variables")
    alpha = np.zeros(p)
    theta = np.zeros(p)
    hit = m > 0
    alpha[hit] = alpha_sum[hit] / m[hit]
    theta[hit] = theta_sum[hit] / m[hit]
    return Step1Result(m_counts=m, alpha=alpha, theta=theta,
                       lambdas=np.array(lambdas))


def build_lambda_pool(step0_lambda: float, step1_lambdas: np.ndarray,
                      rel_tol: float = 1e-9) -> np.ndarray:
    """Descending, deduplicated pool of previously optimal penalty levels."""
    pool = np.concatenate(([step0_lambda], np.asarray(step1_lambdas, dtype=np.float64)))
    pool = np.sort(pool)[::-1]
    kept = [pool[0]]
    for lam in pool[1:]:
        if abs(kept[-1] - lam) > rel_tol * max(kept[-1], lam):
            kept.append(lam)
    return np.array(kept)


def step2_select(dataset: Dataset, step1: Step1Result, lambda_pool: np.ndarray,
                 base_learner: BaseLearner, B: int, seed: SeedStream):
    """B weighted-subsample refits tuned over the restricted pool.

    Returns (beta_hat, pi_hat, s_tilde, reduced, step2_lambdas). When
    sum(theta) rounds up past the number of positive-weight variables,
    s_tilde is reduced to that count and `reduced` reports it. When no
    variable has positive weight (nothing was ever selected in Step 1)
    there is nothing to refit: all-zero averages come back.
    """
    p = dataset.p
    weights = step1.alpha * step1.theta
    s_tilde = int(np.ceil(step1.theta.sum()))
    positive = int((weights > 0).sum())
    reduced = s_tilde > positive
    s_tilde = min(s_tilde, positive)
    beta_sum = np.zeros(p)
    pi_sum = np.zeros(p)
    lams = np.full(B, np.nan)
    if s_tilde > 0:
        for b in range(B):
            rng = seed.child(b, 0).generator()
            cols = np.sort(weighted_subset(rng, weights, s_tilde))
            try:
                beta_sub, lam = base_learner.cv_fit(
                    dataset.x[:, cols], dataset.y, seed.child(b, 1),
                    lambdas=lambda_pool)
            except DegenerateGrid:
                continue
            beta_sum[cols] += beta_sub
            pi_sum[cols] += (beta_sub != 0.0)
            lams[b] = lam
    return beta_sum / B, pi_sum / B, s_tilde, reduced, lams


def threshold_select(pi_hat: np.ndarray, beta_hat: np.ndarray,
                     pi_threshold: float = 0.5,
                     rank_by: str = RANK_BY_PROBABILITY):
    """Estimate the model size, then keep that many top variables.

    s0_hat = #{pi_hat >= pi_threshold}; ranking key is pi_hat
    ("probability") or |beta_hat| ("coefficient"); ties prefer the
    lower index. Returns (s0_hat, selected ascending).
    """
    p = pi_hat.shape[0]
    s0 = int((pi_hat >= pi_threshold).sum())
    if s0 == 0:
        return 0, np.empty(0, dtype=np.int64)
    key = pi_hat if rank_by == RANK_BY_PROBABILITY else np.abs(beta_hat)
    order = np.lexsort((np.arange(p), -key))
    return s0, np.sort(order[:s0]).astype(np.int64)


def strands_fit(dataset: Dataset, config: StrandsConfig = StrandsConfig(),
                base_learner: BaseLearner = None,
                seed: SeedStream = SeedStream(0)) -> StrandsResult:
    """Run the full pipeline: cluster, explore, refit, threshold.

    The full-data base fit runs in every clustering mode; its winner
    lambda anchors the Step-2 pool, and in correlation/random modes its
    selected set seeds the clustering (random mode then scrambles the
    template's membership, preserving sizes).
    """
    if base_learner is None:
        base_learner = BaseLearner()
    beta0, lam0 = base_learner.cv_fit(dataset.x, dataset.y, seed.child(_K_STEP0))
    if config.clustering_mode == MODE_NONE:
        clustering = no_cluster(dataset.p)
    else:
        corr = correlation_matrix(dataset.x)
        clustering = cluster_from_support(corr, np.flatnonzero(beta0), config.rho0)
        if config.clustering_mode == MODE_RANDOM:
            clustering = random_cluster(clustering, seed.child(_K_SHUFFLE))
    step1 = step1_explore(dataset, clustering, base_learner, config.B,
                          seed.child(_K_STEP1))
    pool = build_lambda_pool(lam0, step1.lambdas)
    beta_hat, pi_hat, s_tilde, reduced, step2_lams = step2_select(
        dataset, step1, pool, base_learner, config.B, seed.child(_K_STEP2))
    s0_hat, selected = threshold_select(pi_hat, beta_hat,
                                        config.pi_threshold, config.rank_by)
    return StrandsResult(
        beta_hat=beta_hat, pi_hat=pi_hat, s0_hat=s0_hat, selected=selected,
        alpha=step1.alpha, theta=step1.theta, m_counts=step1.m_counts,
        lambda_pool=pool, s_tilde=s_tilde, s_tilde_reduced=reduced,
        clustering=clustering, config=config, step2_lambdas=step2_lams)


def step_diagnostic(result: StrandsResult,
                    relevant: np.ndarray | None = None) -> dict:
    """Tabulate Step-1 vs Step-2 evidence per variable.

    Columns: j, theta, pi_hat, alpha, abs_beta, and (when the caller
    knows the truth) a 0/1 `relevant` flag. `relevant` is the true
    support, as indices or as a length-p boolean mask. The interesting
    contrast is pi_hat - theta: the Step-2 reweighting should push it
    up for relevant variables and down for irrelevant ones.
    """
    p = result.beta_hat.shape[0]
    table = {
        "j": np.arange(p, dtype=np.int64),
        "theta": result.theta,
        "pi_hat": result.pi_hat,
        "alpha": result.alpha,
        "abs_beta": np.abs(result.beta_hat),
    }
    if relevant is not None:
        rel = np.asarray(relevant)
        if rel.dtype != np.bool_:
            rel = rel.astype(np.int64)
        flag = np.zeros(p, dtype=np.int64)
        flag[rel] = 1
        table["relevant"] = flag
    return table
