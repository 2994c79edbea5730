"""Penalised least-squares solvers with pathwise tuning.

For standardized data the objective at penalty level lam is

    (1/2n) ||y - X beta||^2 + lam * sum_j (a_j |beta_j| + g_j/2 beta_j^2)

with per-coordinate l1 weights a_j and l2 factors g_j set by the penalty
kind: lasso (a=1, g=0), elastic net (a=alpha, g=1-alpha), adaptive lasso
(a=w_j, g=0, w_j = 1/|init_j|^tau). An infinite weight pins a
coordinate at exactly zero.

Tuning is plain K-fold cross-validation over a descending lambda grid:
pooled held-out squared error, minimum wins, ties broken toward the
larger lambda, refit on the full data at the winner.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import _descent
from .data import Dataset
from .errors import DegenerateGrid, DimensionMismatch, NonConvergence
from .seeding import SeedStream

# ---------------------------------------------------------------- config


@dataclass(frozen=True)
class SolverConfig:
    """Convergence policy for coordinate descent.

    A lambda point is converged when the largest coordinate change over
    a sweep is <= sweep_tol AND the KKT residual is <= tol.
    """

    tol: float = 1e-6
    sweep_tol: float = 1e-7
    max_sweeps: int = 10_000
    accel: bool = True


@dataclass(frozen=True)
class CvConfig:
    folds: int = 5


@dataclass(frozen=True)
class LambdaGrid:
    """Log-spaced descending grid specification.

    `ratio` is lambda_min / lambda_max; None picks 1e-3 when the data
    has more rows than fitted columns and 1e-2 otherwise. `lambdas`
    overrides the automatic construction entirely.
    """

    size: int = 100
    ratio: float | None = None
    lambdas: np.ndarray | None = None


@dataclass(frozen=True)
class PenaltySpec:
    """Which penalty, with its shape parameters.

    kind: "lasso", "enet" or "adalasso".
    enet_alpha: l1 share for the elastic net, in (0, 1].
    weights: explicit adaptive-lasso l1 weights; None means derive them
        from a CV-tuned lasso init inside cv_select.
    adaptive_tau: exponent for weights 1/|init|^tau.
    """

    kind: str = "lasso"
    enet_alpha: float = 0.5
    weights: np.ndarray | None = None
    adaptive_tau: float = 1.0

    def __post_init__(self):
        if self.kind not in ("lasso", "enet", "adalasso"):
            raise ValueError(f"unknown penalty kind {self.kind!r}")
        if self.kind == "enet" and not (0.0 < self.enet_alpha <= 1.0):
            raise ValueError("enet_alpha must be in (0, 1]")

    def l1_weights(self, p: int) -> np.ndarray:
        if self.kind == "lasso":
            return np.ones(p)
        if self.kind == "enet":
            return np.full(p, self.enet_alpha)
        if self.weights is None:
            raise ValueError("adalasso needs weights at solve time")
        w = np.asarray(self.weights, dtype=np.float64)
        if w.shape != (p,):
            raise DimensionMismatch(f"weights shape {w.shape}, expected ({p},)")
        if np.any(w < 0) or np.any(np.isnan(w)):
            raise ValueError("adaptive weights must be nonnegative")
        return w

    def l2_factors(self, p: int) -> np.ndarray:
        if self.kind == "enet":
            return np.full(p, 1.0 - self.enet_alpha)
        return np.zeros(p)


@dataclass(frozen=True)
class CoefficientVector:
    """Coefficients on the standardized scale plus their support."""

    values: np.ndarray

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.values)


@dataclass(frozen=True)
class FitResult:
    coefficients: CoefficientVector
    lambda_selected: float
    cv_error: float
    penalty: PenaltySpec
    lambda_grid: np.ndarray = field(repr=False)
    cv_error_path: np.ndarray = field(repr=False)


def adaptive_weights_from(init: np.ndarray, tau: float = 1.0) -> np.ndarray:
    """w_j = 1 / |init_j|^tau, with +inf where init_j = 0."""
    init = np.asarray(init, dtype=np.float64)
    w = np.full(init.shape, np.inf)
    nz = init != 0.0
    w[nz] = 1.0 / np.abs(init[nz]) ** tau
    return w


# ---------------------------------------------------------------- grids


def lambda_grid_auto(x: np.ndarray, y: np.ndarray, penalty: PenaltySpec,
                     grid: LambdaGrid = LambdaGrid()) -> np.ndarray:
    """Descending log-spaced grid from lambda_max down to ratio * lambda_max.

    lambda_max = max_j |x_j'y| / (n a_j) over coordinates with finite
    positive weight: the smallest level at which the solution is all
    zero.
    """
    if grid.lambdas is not None:
        lams = np.asarray(grid.lambdas, dtype=np.float64)
        if lams.ndim != 1 or lams.size == 0 or np.any(lams <= 0):
            raise DegenerateGrid("explicit grid must be positive and non-empty")
        return np.sort(lams)[::-1].copy()
    n, p = x.shape
    a = penalty.l1_weights(p)
    corr = np.abs(x.T @ y) / n
    finite = np.isfinite(a) & (a > 0)
    if not finite.any():
        raise DegenerateGrid("no coordinate has a finite positive l1 weight")
    lam_max = float(np.max(corr[finite] / a[finite]))
    if lam_max <= 0.0:
        raise DegenerateGrid("X'y = 0: grid top would be zero")
    ratio = grid.ratio
    if ratio is None:
        ratio = 1e-3 if n > p else 1e-2
    return np.geomspace(lam_max, lam_max * ratio, grid.size)


def cv_fold_ids(n: int, folds: int, rng: np.random.Generator) -> np.ndarray:
    """Fold labels: a seeded permutation dealt round-robin."""
    if not (2 <= folds <= n):
        raise ValueError(f"folds must be in [2, {n}]")
    ids = np.empty(n, dtype=np.int64)
    perm = rng.permutation(n)
    for i in range(n):
        ids[perm[i]] = i % folds
    return ids


# ------------------------------------------------------- array-level core


def _check_xy(x, y):
    if x.ndim != 2 or y.ndim != 1 or x.shape[0] != y.shape[0]:
        raise DimensionMismatch(f"x {x.shape} vs y {y.shape}")


def fit_path_arrays(x: np.ndarray, y: np.ndarray, lambdas: np.ndarray,
                    penalty: PenaltySpec, config: SolverConfig = SolverConfig(),
                    beta0: np.ndarray | None = None) -> np.ndarray:
    """Solve at every lambda of a descending grid. Returns (L, p) betas."""
    _check_xy(x, y)
    n, p = x.shape
    G = (x.T @ x) / n
    b = (x.T @ y) / n
    if beta0 is None:
        beta0 = np.zeros(p)
    betas, status, _ = _descent.cd_path(
        G, b, lambdas, penalty.l1_weights(p), penalty.l2_factors(p), beta0,
        config.sweep_tol, config.tol, config.max_sweeps, config.accel)
    bad = np.flatnonzero(status)
    if bad.size:
        raise NonConvergence(config.max_sweeps, lam=float(lambdas[bad[0]]))
    return betas


def _cv_curve_arrays(x, y, lambdas, penalty, fold_ids, folds, config):
    """Pooled held-out SSE/n along the grid."""
    n, p = x.shape
    l1w = penalty.l1_weights(p)
    l2f = penalty.l2_factors(p)
    S_full = x.T @ x
    h_full = x.T @ y
    sse = np.zeros(lambdas.size)
    beta0 = np.zeros(p)
    for k in range(folds):
        val = fold_ids == k
        x_val = x[val]
        y_val = y[val]
        n_tr = n - x_val.shape[0]
        G_tr = (S_full - x_val.T @ x_val) / n_tr
        b_tr = (h_full - x_val.T @ y_val) / n_tr
        betas, status, _ = _descent.cd_path(
            G_tr, b_tr, lambdas, l1w, l2f, beta0,
            config.sweep_tol, config.tol, config.max_sweeps, config.accel)
        bad = np.flatnonzero(status)
        if bad.size:
            raise NonConvergence(config.max_sweeps, lam=float(lambdas[bad[0]]))
        resid = y_val[:, None] - x_val @ betas.T
        sse += (resid * resid).sum(axis=0)
    return sse / n


def _select_lambda(cv_curve: np.ndarray) -> int:
    """Index of the minimum; ties go to the larger lambda (earlier index)."""
    best = 0
    for i in range(1, cv_curve.size):
        if cv_curve[i] < cv_curve[best]:
            best = i
    return best


def cv_fit_arrays(x: np.ndarray, y: np.ndarray, penalty: PenaltySpec,
                  seed: SeedStream, grid: LambdaGrid = LambdaGrid(),
                  cv: CvConfig = CvConfig(),
                  config: SolverConfig = SolverConfig()):
    """CV-tune and refit on arrays. Returns (beta, lam, cv_curve, lambdas).

    The grid is built from the full (sub)data unless `grid.lambdas`
    pins it; the refit solves the path prefix down to the winner only.
    """
    _check_xy(x, y)
    lambdas = lambda_grid_auto(x, y, penalty, grid)
    fold_ids = cv_fold_ids(x.shape[0], cv.folds, seed.generator())
    curve = _cv_curve_arrays(x, y, lambdas, penalty, fold_ids, cv.folds, config)
    sel = _select_lambda(curve)
    betas = fit_path_arrays(x, y, lambdas[:sel + 1], penalty, config)
    return betas[sel], float(lambdas[sel]), curve, lambdas


# -------------------------------------------------------- public surface


def _resolve_adaptive(dataset_x, dataset_y, penalty, seed, cv, config):
    """Fill in adaptive weights from a CV-lasso init when absent."""
    if penalty.kind != "adalasso" or penalty.weights is not None:
        return penalty, seed
    init, _, _, _ = cv_fit_arrays(
        dataset_x, dataset_y, PenaltySpec("lasso"), seed.child(0),
        LambdaGrid(), cv, config)
    w = adaptive_weights_from(init, penalty.adaptive_tau)
    if not np.isfinite(w).any():
        raise DegenerateGrid("adaptive init selected nothing: all weights infinite")
    return replace(penalty, weights=w), seed.child(1)


def cv_select(dataset: Dataset, penalty: PenaltySpec = PenaltySpec("lasso"),
              grid: LambdaGrid = LambdaGrid(), cv: CvConfig = CvConfig(),
              seed: SeedStream = SeedStream(0),
              config: SolverConfig = SolverConfig()) -> FitResult:
    """Cross-validated fit of one penalty on a standardized dataset.

    For the adaptive lasso with no explicit weights this runs the
    two-stage recipe: CV-tuned lasso init (child seed 0), then the
    weighted fit tuned on its own grid (child seed 1). `grid.lambdas`
    restricts only the final stage.

    Returns
    -------
    FitResult
        With `lambda_selected` always an element of the tuning grid.
    """
    penalty, seed = _resolve_adaptive(dataset.x, dataset.y, penalty, seed, cv, config)
    beta, lam, curve, lambdas = cv_fit_arrays(
        dataset.x, dataset.y, penalty, seed, grid, cv, config)
    sel = int(np.flatnonzero(lambdas == lam)[0])
    return FitResult(
        coefficients=CoefficientVector(beta),
        lambda_selected=lam,
        cv_error=float(curve[sel]),
        penalty=penalty,
        lambda_grid=lambdas,
        cv_error_path=curve,
    )


@dataclass(frozen=True)
class BaseLearner:
    """A penalty bundled with its tuning procedure.

    The ensembles apply one of these to many column subsets; `cv_fit`
    is the array-level entry point they use. `lambdas` restricts the
    tuning grid of the final stage (for the adaptive lasso the
    stage-one init always keeps its own automatic grid).
    """

    penalty: PenaltySpec = PenaltySpec("lasso")
    grid: LambdaGrid = LambdaGrid()
    cv: CvConfig = CvConfig()
    config: SolverConfig = SolverConfig()

    def cv_fit(self, x: np.ndarray, y: np.ndarray, seed: SeedStream,
               lambdas: np.ndarray | None = None):
        """CV-tune on arrays. Returns (beta, lambda_selected)."""
        pen, seed = _resolve_adaptive(x, y, self.penalty, seed, self.cv, self.config)
        grid = self.grid if lambdas is None else LambdaGrid(lambdas=np.asarray(lambdas))
        beta, lam, _, _ = cv_fit_arrays(x, y, pen, seed, grid, self.cv, self.config)
        return beta, lam

    def fit_dataset(self, dataset: Dataset, seed: SeedStream,
                    lambdas: np.ndarray | None = None) -> FitResult:
        grid = self.grid if lambdas is None else LambdaGrid(lambdas=np.asarray(lambdas))
        return cv_select(dataset, self.penalty, grid, self.cv, seed, self.config)


def fit_at_lambda(dataset: Dataset, penalty: PenaltySpec, lam: float,
                  config: SolverConfig = SolverConfig(),
                  warm_start: np.ndarray | None = None) -> CoefficientVector:
    """Solve at a single penalty level (optionally from a warm start)."""
    if lam <= 0:
        raise ValueError("lambda must be positive")
    if penalty.kind == "adalasso" and penalty.weights is None:
        raise ValueError("fit_at_lambda needs explicit adaptive weights")
    betas = fit_path_arrays(dataset.x, dataset.y, np.array([float(lam)]),
                            penalty, config, beta0=warm_start)
    return CoefficientVector(betas[0])


def fit_path(dataset: Dataset, penalty: PenaltySpec = PenaltySpec("lasso"),
             grid: LambdaGrid = LambdaGrid(),
             config: SolverConfig = SolverConfig()):
    """Full regularization path. Returns (lambdas, betas)."""
    if penalty.kind == "adalasso" and penalty.weights is None:
        raise ValueError("fit_path needs explicit adaptive weights")
    lambdas = lambda_grid_auto(dataset.x, dataset.y, penalty, grid)
    betas = fit_path_arrays(dataset.x, dataset.y, lambdas, penalty, config)
    return lambdas, betas


def kkt_residual(x: np.ndarray, y: np.ndarray, beta: np.ndarray,
                 penalty: PenaltySpec, lam: float) -> float:
    """Max stationarity violation, computed directly from X and y.

    Independent of the solver internals on purpose: c = X'(y - X beta)/n,
    nonzero coordinates need |c_j - lam g_j beta_j - lam a_j sign| and
    zero coordinates max(0, |c_j| - lam a_j).
    """
    n, p = x.shape
    a = penalty.l1_weights(p)
    g = penalty.l2_factors(p)
    c = x.T @ (y - x @ beta) / n
    worst = 0.0
    for j in range(p):
        if not np.isfinite(a[j]):
            continue
        if beta[j] != 0.0:
            res = abs(c[j] - lam * g[j] * beta[j] - lam * a[j] * np.sign(beta[j]))
        else:
            res = max(0.0, abs(c[j]) - lam * a[j])
        worst = max(worst, res)
    return float(worst)


def penalized_objective(x: np.ndarray, y: np.ndarray, beta: np.ndarray,
                        penalty: PenaltySpec, lam: float) -> float:
    """(1/2n)||y - X beta||^2 + lam sum_j (a_j|beta_j| + g_j/2 beta_j^2)."""
    n, p = x.shape
    a = penalty.l1_weights(p)
    g = penalty.l2_factors(p)
    r = y - x @ beta
    pen = 0.0
    for j in range(p):
        if beta[j] != 0.0:
            pen += a[j] * abs(beta[j]) + 0.5 * g[j] * beta[j] * beta[j]
    return float(0.5 * (r @ r) / n + lam * pen)
