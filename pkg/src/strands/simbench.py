"""Synthetic benchmark designs, scoring, and the replicate harness.

Scenarios are named generative designs (covariance structure, sparse
coefficient vector, noise level or pinned signal-to-noise ratio). Each
replicate draws fresh data from the design, every requested method fits
the identical dataset, and metrics (TP/FP/PPV against the truth set,
population MSE, prediction error) are aggregated with bootstrap
standard errors. All randomness flows through derived seed paths, so a
run is reproducible bit-for-bit regardless of worker count.
"""

from __future__ import annotations

import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from multiprocessing import get_context

import numpy as np
from scipy.linalg import toeplitz as _toeplitz

from .data import Dataset, standardize
from .ensemble import StrandsConfig, strands_fit
from .errors import (DegenerateBootstrap, DegenerateGrid, DegenerateWeights,
                     DimensionMismatch, EmptyEnsemble, NonConvergence,
                     UnknownScenario)
from .rlasso import RandomLassoConfig, rlasso_fit
from .seeding import SeedStream
from .solvers import BaseLearner, PenaltySpec, cv_select

COV_IDENTITY = "identity"
COV_TOEPLITZ = "toeplitz"
COV_PAIRWISE_BLOCKS = "pairwise_blocks"
COV_BLOCK_TOEPLITZ = "block_toeplitz"

PLACE_FIXED = "fixed"
PLACE_RANDOM = "random"
PLACE_RANDOM_IN_BLOCK = "random_in_block"

# stable ids: they enter the per-method seed path, so adding a method
# later must not reshuffle the randomness of existing ones
METHOD_IDS = {
    "lasso": 0,
    "enet": 1,
    "adalasso": 2,
    "rlasso": 3,
    "strd-lasso": 4,
    "strd-adalasso": 5,
}

_FIT_FAILURES = (NonConvergence, DegenerateGrid, DegenerateBootstrap,
                 DegenerateWeights, EmptyEnsemble)


# ------------------------------------------------------------ covariance


@dataclass(frozen=True)
class CovarianceSpec:
    """Population covariance of the predictors, by construction recipe.

    kind "identity": V = I. kind "toeplitz": V_ij = rho^|i-j| over all
    p variables. kind "pairwise_blocks": n_blocks equicorrelated blocks
    of block_size (V_ij = rho within a block), remaining variables
    independent. kind "block_toeplitz": n_blocks blocks, Toeplitz
    within each. Unit diagonal in every case.
    """

    kind: str
    p: int
    rho: float = 0.0
    block_size: int = 0
    n_blocks: int = 0

    def __post_init__(self):
        if self.kind not in (COV_IDENTITY, COV_TOEPLITZ,
                             COV_PAIRWISE_BLOCKS, COV_BLOCK_TOEPLITZ):
            raise ValueError(f"unknown covariance kind {self.kind!r}")
        if self.p < 1:
            raise ValueError("p must be >= 1")
        if self.kind != COV_IDENTITY and not (0.0 <= self.rho < 1.0):
            raise ValueError("rho must be in [0, 1)")
        if self.kind in (COV_PAIRWISE_BLOCKS, COV_BLOCK_TOEPLITZ):
            if self.block_size < 1 or self.n_blocks < 1:
                raise ValueError("blocks need block_size and n_blocks >= 1")
            if self.block_size * self.n_blocks > self.p:
                raise ValueError("blocks do not fit in p variables")

    @property
    def tail(self) -> int:
        """Number of trailing independent variables after the blocks."""
        if self.kind in (COV_PAIRWISE_BLOCKS, COV_BLOCK_TOEPLITZ):
            return self.p - self.block_size * self.n_blocks
        return 0

    def matrix(self) -> np.ndarray:
        """Materialise V."""
        if self.kind == COV_IDENTITY:
            return np.eye(self.p)
        if self.kind == COV_TOEPLITZ:
            return _toeplitz(self.rho ** np.arange(self.p))
        v = np.eye(self.p)
        m = self.block_size
        for k in range(self.n_blocks):
            sl = slice(k * m, (k + 1) * m)
            if self.kind == COV_PAIRWISE_BLOCKS:
                v[sl, sl] = self.rho
                v[sl, sl][np.diag_indices(m)] = 1.0
            else:
                v[sl, sl] = _toeplitz(self.rho ** np.arange(m))
        return v

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """n rows from N(0, V), via exact factors of each block.

        Equicorrelated blocks use the shared-factor construction
        sqrt(rho) z0 + sqrt(1-rho) z; Toeplitz ones the AR(1)
        recursion. Both give V exactly, no numeric factorisation.
        """
        if self.kind == COV_IDENTITY:
            return rng.standard_normal((n, self.p))
        if self.kind == COV_TOEPLITZ:
            return _ar1_sample(rng, n, self.p, self.rho)
        x = np.empty((n, self.p))
        m = self.block_size
        for k in range(self.n_blocks):
            sl = slice(k * m, (k + 1) * m)
            if self.kind == COV_PAIRWISE_BLOCKS:
                z0 = rng.standard_normal((n, 1))
                z = rng.standard_normal((n, m))
                x[:, sl] = np.sqrt(self.rho) * z0 + np.sqrt(1.0 - self.rho) * z
            else:
                x[:, sl] = _ar1_sample(rng, n, m, self.rho)
        if self.tail:
            x[:, self.p - self.tail:] = rng.standard_normal((n, self.tail))
        return x


def _ar1_sample(rng, n, m, rho):
    e = rng.standard_normal((n, m))
    x = np.empty((n, m))
    x[:, 0] = e[:, 0]
    c = np.sqrt(1.0 - rho * rho)
    for t in range(1, m):
        x[:, t] = rho * x[:, t - 1] + c * e[:, t]
    return x


# ------------------------------------------------------------- scenarios


@dataclass(frozen=True)
class SimScenario:
    """A named generative design.

    `beta_values` are the nonzero coefficients; `signal_positions`
    places them when the placement is "fixed". Random placements
    ("random" anywhere, "random_in_block" one signal per correlated
    block) are redrawn per dataset from the draw's seed; `beta_true`
    then reports the canonical template placement.

    Exactly one of `sigma` and `snr_nominal` is set: a pinned noise sd,
    or a target signal-to-noise ratio that the sampler solves sigma
    from on each realized design matrix.
    """

    name: str
    n: int
    p: int
    covariance: CovarianceSpec
    beta_values: tuple
    signal_positions: tuple | None
    placement: str = PLACE_FIXED
    sigma: float | None = None
    snr_nominal: float | None = None

    def __post_init__(self):
        if (self.sigma is None) == (self.snr_nominal is None):
            raise ValueError("set exactly one of sigma and snr_nominal")
        if self.sigma is not None and self.sigma < 0:
            raise ValueError("sigma must be >= 0")
        if self.placement == PLACE_FIXED:
            if self.signal_positions is None:
                raise ValueError("fixed placement needs signal_positions")
            if len(self.signal_positions) != len(self.beta_values):
                raise ValueError("one position per beta value")
        if self.covariance.p != self.p:
            raise ValueError("covariance p disagrees with scenario p")

    @property
    def s0(self) -> int:
        return len(self.beta_values)

    @property
    def beta_true(self) -> np.ndarray:
        """Template coefficient vector (canonical positions)."""
        beta = np.zeros(self.p)
        pos = self._template_positions()
        beta[pos] = np.asarray(self.beta_values)
        return beta

    def _template_positions(self) -> np.ndarray:
        if self.placement == PLACE_FIXED:
            return np.asarray(self.signal_positions, dtype=np.int64)
        if self.placement == PLACE_RANDOM:
            return np.arange(self.s0, dtype=np.int64)
        m = self.covariance.block_size
        return np.arange(self.s0, dtype=np.int64) * m


_LOW_DIM_BETA45 = (3.0, 3.0, 3.0, 3.0, 3.0, 4.0, 4.0, 4.0, 4.0, 4.0)


def build_scenario(name: str, n: int | None = None) -> SimScenario:
    """Construct a built-in design by name, optionally overriding n.

    Names: example1..example5, example7..example10, null50, null100.
    There is no design numbered 6.
    """
    if name == "example1":
        return SimScenario(
            name=name, n=n or 20, p=8,
            covariance=CovarianceSpec(COV_TOEPLITZ, 8, rho=0.5),
            beta_values=(3.0, 1.5, 2.0), signal_positions=(0, 1, 4),
            sigma=3.0)
    if name == "example2":
        return SimScenario(
            name=name, n=n or 20, p=8,
            covariance=CovarianceSpec(COV_TOEPLITZ, 8, rho=0.5),
            beta_values=(0.85,) * 8, signal_positions=tuple(range(8)),
            sigma=3.0)
    if name == "example3":
        return SimScenario(
            name=name, n=n or 100, p=40,
            covariance=CovarianceSpec(COV_PAIRWISE_BLOCKS, 40, rho=0.9,
                                      block_size=10, n_blocks=1),
            beta_values=(3.0,) * 5 + (-2.0,) * 5,
            signal_positions=tuple(range(10)), sigma=3.0)
    if name == "example4":
        return SimScenario(
            name=name, n=n or 100, p=300,
            covariance=CovarianceSpec(COV_IDENTITY, 300),
            beta_values=_LOW_DIM_BETA45, signal_positions=None,
            placement=PLACE_RANDOM, sigma=3.0)
    if name == "example5":
        return SimScenario(
            name=name, n=n or 100, p=300,
            covariance=CovarianceSpec(COV_PAIRWISE_BLOCKS, 300, rho=0.7,
                                      block_size=10, n_blocks=10),
            beta_values=_LOW_DIM_BETA45, signal_positions=None,
            placement=PLACE_RANDOM_IN_BLOCK, sigma=3.0)
    if name == "example7":
        return SimScenario(
            name=name, n=n or 200, p=500,
            covariance=CovarianceSpec(COV_IDENTITY, 500),
            beta_values=(3.0,) * 20, signal_positions=None,
            placement=PLACE_RANDOM, snr_nominal=1.0)
    if name == "example8":
        pos = tuple(10 * b + i for b in range(4) for i in range(5))
        return SimScenario(
            name=name, n=n or 100, p=500,
            covariance=CovarianceSpec(COV_PAIRWISE_BLOCKS, 500, rho=0.9,
                                      block_size=10, n_blocks=50),
            beta_values=(3.0,) * 20, signal_positions=pos, snr_nominal=4.0)
    if name in ("example9", "example10"):
        kind = COV_PAIRWISE_BLOCKS if name == "example9" else COV_BLOCK_TOEPLITZ
        rho = 0.7 if name == "example9" else 0.95
        # the pair sits 7 apart so the Toeplitz variant has
        # within-pair correlation 0.95^7 ~ 0.7, matching the pairwise one
        pos = tuple(100 * b + off for b in range(10) for off in (0, 7))
        return SimScenario(
            name=name, n=n or 300, p=1000,
            covariance=CovarianceSpec(kind, 1000, rho=rho,
                                      block_size=100, n_blocks=10),
            beta_values=(3.0,) * 20, signal_positions=pos, snr_nominal=2.0)
    if name in ("null50", "null100"):
        return SimScenario(
            name=name, n=n or (50 if name == "null50" else 100), p=300,
            covariance=CovarianceSpec(COV_IDENTITY, 300),
            beta_values=(), signal_positions=(), sigma=1.0)
    raise UnknownScenario(f"no such scenario: {name!r}")


SCENARIO_NAMES = ("example1", "example2", "example3", "example4", "example5",
                  "example7", "example8", "example9", "example10",
                  "null50", "null100")


# ----------------------------------------------------------------- draws


@dataclass(frozen=True)
class SimDraw:
    """One realized dataset from a scenario, plus its truth."""

    scenario: SimScenario
    dataset: Dataset
    raw_x: np.ndarray = field(repr=False)
    raw_y: np.ndarray = field(repr=False)
    beta_true: np.ndarray
    positions: np.ndarray
    sigma: float
    x_test: np.ndarray | None = field(default=None, repr=False)
    y_test: np.ndarray | None = field(default=None, repr=False)


def _draw_positions(scenario: SimScenario, rng) -> np.ndarray:
    if scenario.placement == PLACE_FIXED:
        return np.asarray(scenario.signal_positions, dtype=np.int64)
    if scenario.placement == PLACE_RANDOM:
        return rng.choice(scenario.p, size=scenario.s0,
                          replace=False).astype(np.int64)
    m = scenario.covariance.block_size
    offsets = rng.integers(0, m, size=scenario.covariance.n_blocks)
    return (np.arange(scenario.covariance.n_blocks) * m + offsets).astype(np.int64)


def sample_dataset(scenario: SimScenario, seed: SeedStream,
                   test_n: int = 0) -> SimDraw:
    """Draw y = X beta + eps from the design and standardize it.

    For SNR-pinned scenarios sigma is solved on the realized X so the
    drawn dataset hits the nominal ratio exactly. With test_n > 0, a
    held-out raw split is drawn from the same design (same beta and
    sigma) after the training data.
    """
    rng = seed.generator()
    x = scenario.covariance.sample(rng, scenario.n)
    positions = _draw_positions(scenario, rng)
    beta = np.zeros(scenario.p)
    beta[positions] = np.asarray(scenario.beta_values)
    f = x @ beta
    if scenario.sigma is not None:
        sigma = float(scenario.sigma)
    else:
        sigma = float(np.sqrt(f @ f / scenario.n) / scenario.snr_nominal)
    y = f + sigma * rng.standard_normal(scenario.n)
    x_test = y_test = None
    if test_n > 0:
        x_test = scenario.covariance.sample(rng, test_n)
        y_test = x_test @ beta + sigma * rng.standard_normal(test_n)
    return SimDraw(scenario=scenario, dataset=standardize(x, y),
                   raw_x=x, raw_y=y, beta_true=beta, positions=positions,
                   sigma=sigma, x_test=x_test, y_test=y_test)


def snr(draw: SimDraw) -> float:
    """Realized signal-to-noise ratio sqrt(beta'X'X beta / (n sigma^2))."""
    f = draw.raw_x @ draw.beta_true
    signal = float(np.sqrt(f @ f / draw.scenario.n))
    if signal == 0.0:
        return 0.0
    if draw.sigma == 0.0:
        return float("inf")
    return signal / draw.sigma


# --------------------------------------------------------------- metrics


def selection_metrics(selected, truth, p: int):
    """(tp, fp, ppv); ppv is nan when nothing was selected."""
    sel = np.zeros(p, dtype=bool)
    sel[np.asarray(selected, dtype=np.int64)] = True
    tru = np.zeros(p, dtype=bool)
    tru[np.asarray(truth, dtype=np.int64)] = True
    tp = int((sel & tru).sum())
    fp = int((sel & ~tru).sum())
    ppv = tp / (tp + fp) if (tp + fp) > 0 else float("nan")
    return tp, fp, ppv


def mse_population(beta_hat: np.ndarray, beta_true: np.ndarray,
                   covariance: CovarianceSpec) -> float:
    """(beta_hat - beta_true)' V (beta_hat - beta_true), analytic V."""
    beta_hat = np.asarray(beta_hat)
    beta_true = np.asarray(beta_true)
    if beta_hat.shape != (covariance.p,) or beta_true.shape != (covariance.p,):
        raise DimensionMismatch(
            f"coefficient lengths {beta_hat.shape}/{beta_true.shape} "
            f"vs p={covariance.p}")
    d = beta_hat - beta_true
    return float(d @ (covariance.matrix() @ d))


@dataclass(frozen=True)
class PredictionModel:
    """Coefficients plus the training standardization they assume."""

    beta: np.ndarray
    column_means: np.ndarray
    column_sds: np.ndarray
    y_mean: float

    @classmethod
    def from_dataset(cls, dataset: Dataset, beta: np.ndarray):
        return cls(beta=np.asarray(beta), column_means=dataset.column_means,
                   column_sds=dataset.column_sds, y_mean=dataset.y_mean)

    def predict(self, new_x_raw: np.ndarray) -> np.ndarray:
        """Predict responses for raw-scale rows, in original units."""
        new_x_raw = np.asarray(new_x_raw, dtype=np.float64)
        if new_x_raw.ndim != 2 or new_x_raw.shape[1] != self.beta.shape[0]:
            raise DimensionMismatch(
                f"expected (m, {self.beta.shape[0]}) rows, got {new_x_raw.shape}")
        xs = (new_x_raw - self.column_means) / self.column_sds
        return xs @ self.beta + self.y_mean


def prediction_error(y_test: np.ndarray, x_test_raw: np.ndarray,
                     model: PredictionModel) -> float:
    """Mean squared held-out error in original units."""
    y_test = np.asarray(y_test, dtype=np.float64)
    x_test_raw = np.asarray(x_test_raw, dtype=np.float64)
    if x_test_raw.ndim != 2 or y_test.ndim != 1 \
            or x_test_raw.shape[0] != y_test.shape[0]:
        raise DimensionMismatch(f"x {x_test_raw.shape} vs y {y_test.shape}")
    resid = y_test - model.predict(x_test_raw)
    return float(resid @ resid / y_test.shape[0])


def split_prediction_error(raw_x, raw_y, fit_fn, repeats: int = 100,
                           test_fraction: float = 0.1,
                           seed: SeedStream = SeedStream(0)):
    """Repeated random-split evaluation on raw data.

    Each repeat holds out round(test_fraction * n) rows, standardizes
    the rest, calls fit_fn(dataset, seed) -> beta, and scores the
    held-out rows in original units. Returns (mean, se_of_mean,
    per-repeat errors).
    """
    raw_x = np.asarray(raw_x, dtype=np.float64)
    raw_y = np.asarray(raw_y, dtype=np.float64)
    n = raw_y.shape[0]
    n_test = int(round(n * test_fraction))
    if not (1 <= n_test <= n - 2):
        raise ValueError("test split leaves too few training rows")
    errors = np.empty(repeats)
    for r in range(repeats):
        perm = seed.child(r, 0).generator().permutation(n)
        test, train = perm[:n_test], perm[n_test:]
        ds = standardize(raw_x[train], raw_y[train])
        beta = fit_fn(ds, seed.child(r, 1))
        errors[r] = prediction_error(raw_y[test], raw_x[test],
                                     PredictionModel.from_dataset(ds, beta))
    se = float(errors.std(ddof=1) / np.sqrt(repeats)) if repeats > 1 else float("nan")
    return float(errors.mean()), se, errors


# ------------------------------------------------------------ experiment


def fit_method(method: str, dataset: Dataset, seed: SeedStream, B: int = 300,
               clustering_mode: str = "correlation", pi_threshold: float = 0.5,
               rho0: float = 0.5):
    """Fit one named method; returns (selected, scored beta, result).

    The scored beta is what the benchmark judges: the plain CV fit for
    lasso/enet/adalasso, the post-threshold coefficients for rlasso,
    and the coefficients restricted to the final selected set for the
    strd methods. The third element is the method's full result object.
    """
    if method in ("lasso", "enet", "adalasso"):
        pen = {"lasso": PenaltySpec("lasso"),
               "enet": PenaltySpec("enet", enet_alpha=0.5),
               "adalasso": PenaltySpec("adalasso")}[method]
        res = cv_select(dataset, pen, seed=seed)
        beta = res.coefficients.values
        return res.coefficients.support, beta, res
    if method == "rlasso":
        res = rlasso_fit(dataset, RandomLassoConfig(B=B), seed)
        return res.selected, res.beta_hat, res
    if method in ("strd-lasso", "strd-adalasso"):
        pen = PenaltySpec("lasso" if method == "strd-lasso" else "adalasso")
        cfg = StrandsConfig(B=B, rho0=rho0, pi_threshold=pi_threshold,
                            clustering_mode=clustering_mode)
        res = strands_fit(dataset, cfg, BaseLearner(penalty=pen), seed)
        return res.selected, res.scored_coefficients(), res
    raise ValueError(f"unknown method {method!r}")


def _replicate_metrics(job):
    """One replicate: draw data, fit every method, score. Pool worker."""
    (scenario, methods, master_seed, r, B, clustering_mode,
     pi_threshold, rho0) = job
    master = SeedStream(master_seed)
    draw = sample_dataset(scenario, master.child(0, r))
    out = {}
    for method in methods:
        seed = master.child(1, r, METHOD_IDS[method])
        try:
            selected, beta, _ = fit_method(method, draw.dataset, seed, B,
                                           clustering_mode, pi_threshold, rho0)
        except _FIT_FAILURES as err:
            out[method] = (np.nan, np.nan, np.nan, np.nan, f"{type(err).__name__}: {err}")
            continue
        tp, fp, ppv = selection_metrics(selected, draw.positions, scenario.p)
        mse = mse_population(beta, draw.beta_true, scenario.covariance)
        out[method] = (float(tp), float(fp), ppv, mse, "")
    return out


@dataclass(frozen=True)
class MethodSummary:
    method: str
    replicates: int
    failures: int
    mean_tp: float
    se_tp: float
    mean_fp: float
    se_fp: float
    mean_ppv: float
    se_ppv: float
    mean_mse: float
    se_mse: float

    _FIELDS = ("method", "replicates", "failures", "mean_tp", "se_tp",
               "mean_fp", "se_fp", "mean_ppv", "se_ppv", "mean_mse", "se_mse")


@dataclass(frozen=True)
class MetricsReport:
    """Aggregated benchmark results plus the config that produced them."""

    config: dict
    rows: tuple
    raw: dict = field(repr=False)  # method -> {metric: per-replicate array}

    def row(self, method: str) -> MethodSummary:
        for r in self.rows:
            if r.method == method:
                return r
        raise KeyError(method)

    def _config_lines(self):
        return [f"# {k}={v}" for k, v in self.config.items()]

    def to_csv_text(self) -> str:
        lines = self._config_lines()
        lines.append(",".join(MethodSummary._FIELDS))
        for r in self.rows:
            cells = [r.method, str(r.replicates), str(r.failures)]
            cells += [_fmt(getattr(r, f)) for f in MethodSummary._FIELDS[3:]]
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"

    def to_json_dict(self) -> dict:
        return {
            "config": dict(self.config),
            "rows": [{f: _json_value(getattr(r, f)) for f in MethodSummary._FIELDS}
                     for r in self.rows],
        }

    def replicates_csv_text(self) -> str:
        lines = self._config_lines()
        lines.append("method,replicate,tp,fp,ppv,mse,error")
        for r in self.rows:
            arrs = self.raw[r.method]
            for i in range(len(arrs["tp"])):
                lines.append(",".join([
                    r.method, str(i),
                    _fmt(arrs["tp"][i]), _fmt(arrs["fp"][i]),
                    _fmt(arrs["ppv"][i]), _fmt(arrs["mse"][i]),
                    arrs["error"][i],
                ]))
        return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    return f"{float(v):.17g}"


def _json_value(v):
    if isinstance(v, float) and not np.isfinite(v):
        return None
    return v


def _nanmean(values) -> float:
    ok = np.isfinite(values)
    return float(values[ok].mean()) if ok.any() else float("nan")


def bootstrap_se(values: np.ndarray, rng: np.random.Generator,
                 n_boot: int = 1000) -> float:
    """SE of the mean by resampling the replicate-level vector.

    Missing entries ride along in the resamples and are dropped inside
    each resample mean. Undefined (nan) with fewer than two observed
    values.
    """
    values = np.asarray(values, dtype=np.float64)
    if np.isfinite(values).sum() < 2:
        return float("nan")
    n = values.shape[0]
    means = np.empty(n_boot)
    for i in range(n_boot):
        v = values[rng.integers(0, n, size=n)]
        means[i] = _nanmean(v)
    ok = np.isfinite(means)
    return float(means[ok].std()) if ok.any() else float("nan")


def run_experiment(scenario, methods, replicates: int, master_seed: int,
                   n: int | None = None, B: int = 300,
                   clustering_mode: str = "correlation",
                   pi_threshold: float = 0.5, rho0: float = 0.5,
                   threads: int | None = None) -> MetricsReport:
    """Benchmark `methods` on `replicates` fresh draws of a scenario.

    Every method sees the identical dataset within a replicate (the
    data seed depends only on the master seed and replicate index), and
    every random decision is keyed by (replicate, method), so schedule
    and worker count cannot change any number in the report. A method
    failure on a replicate is recorded, counted, and excluded from the
    aggregates.
    """
    if isinstance(scenario, str):
        scenario = build_scenario(scenario, n)
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    methods = tuple(methods)
    for m in methods:
        if m not in METHOD_IDS:
            raise ValueError(f"unknown method {m!r}")
    jobs = [(scenario, methods, master_seed, r, B, clustering_mode,
             pi_threshold, rho0) for r in range(replicates)]
    if threads is None:
        threads = os.cpu_count() or 1
    if threads <= 1 or replicates == 1:
        results = [_replicate_metrics(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(threads, replicates),
                                 mp_context=get_context("fork")) as pool:
            results = list(pool.map(_replicate_metrics, jobs))

    raw = {}
    for method in methods:
        arrs = {k: np.empty(replicates) for k in ("tp", "fp", "ppv", "mse")}
        errors = []
        for i, res in enumerate(results):
            tp, fp, ppv, mse, err = res[method]
            arrs["tp"][i], arrs["fp"][i] = tp, fp
            arrs["ppv"][i], arrs["mse"][i] = ppv, mse
            errors.append(err)
        arrs["error"] = errors
        raw[method] = arrs
        n_fail = sum(1 for e in errors if e)
        if n_fail:
            warnings.warn(f"{method}: {n_fail} of {replicates} replicates "
                          f"failed and were excluded")

    se_rng = SeedStream(master_seed).child(2).generator()
    rows = []
    for method in methods:
        arrs = raw[method]
        stats = {}
        for key in ("tp", "fp", "ppv", "mse"):
            stats[f"mean_{key}"] = _nanmean(arrs[key])
            stats[f"se_{key}"] = bootstrap_se(arrs[key], se_rng)
        rows.append(MethodSummary(
            method=method, replicates=replicates,
            failures=sum(1 for e in arrs["error"] if e), **stats))

    config = {
        "scenario": scenario.name, "n": scenario.n, "p": scenario.p,
        "replicates": replicates, "master_seed": master_seed, "B": B,
        "clustering_mode": clustering_mode, "pi_threshold": pi_threshold,
        "rho0": rho0, "methods": ",".join(methods),
    }
    return MetricsReport(config=config, rows=tuple(rows), raw=raw)
