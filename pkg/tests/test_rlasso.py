import numpy as np
import pytest

from strands.data import standardize
from strands.errors import DegenerateBootstrap
from strands.rlasso import (RandomLassoConfig, _bootstrap_fit, default_q_grid,
                            rlasso_fit, rlasso_step1, rlasso_step2)
from strands.seeding import SeedStream
from strands.solvers import BaseLearner


def _toy_dataset(seed, n, p, strength=3.0):
    rng = np.random.default_rng(seed)
    raw = rng.normal(size=(n, p))
    y = strength * raw[:, 0] + rng.normal(size=n)
    return standardize(raw, y)


# ------------------------------------------------------------------ grids


def test_default_q_grid_rounded_fractions():
    # the zero fraction is dropped, not floored to 1
    assert default_q_grid(10).tolist() == [2, 4, 6, 8, 10]
    assert default_q_grid(40).tolist() == [8, 16, 24, 32, 40]
    # tiny p: only the fractions rounding to >= 1 survive
    assert default_q_grid(1).tolist() == [1]
    assert default_q_grid(3).tolist() == [1, 2, 3]


def test_default_q_grid_deduplicates_small_p():
    grid = default_q_grid(3)
    assert grid.tolist() == sorted(set(grid.tolist()))
    assert grid.min() >= 1 and grid.max() == 3


def test_q_grid_bounds_validated():
    ds = _toy_dataset(0, 20, 4)
    with pytest.raises(ValueError):
        rlasso_fit(ds, RandomLassoConfig(B=2, q1_grid=(0, 2)), SeedStream(0))
    with pytest.raises(ValueError):
        rlasso_fit(ds, RandomLassoConfig(B=2, q2_grid=(1, 5)), SeedStream(0))


def test_config_validation():
    with pytest.raises(ValueError):
        RandomLassoConfig(B=0)
    with pytest.raises(ValueError):
        RandomLassoConfig(cv_folds=1)
    with pytest.raises(ValueError):
        RandomLassoConfig(max_redraws=-1)


# -------------------------------------------------------------- bootstrap


def _flaky_design():
    # column 0 is nearly constant: a resample of 8 rows misses the lone
    # nonzero about a third of the time
    rng = np.random.default_rng(99)
    x = np.column_stack([np.zeros(8), rng.normal(size=8)])
    x[0, 0] = 1.0
    y = x[:, 1] + rng.normal(scale=0.3, size=8)
    return x, y


def test_bootstrap_degenerate_draw_is_redrawn():
    x, y = _flaky_design()
    learner = BaseLearner()
    hit_retry = False
    for s in range(40):
        rng = np.random.default_rng(s)
        first_rows = np.random.default_rng(s).integers(0, 8, size=8)
        beta, cols = _bootstrap_fit(x, y, 2, None, rng, SeedStream(s),
                                    learner, max_redraws=100)
        assert cols.tolist() == [0, 1]
        assert np.all(np.isfinite(beta))
        if (x[first_rows][:, 0] == x[first_rows[0], 0]).all():
            hit_retry = True  # that first resample was unusable
    assert hit_retry


def test_bootstrap_gives_up_after_max_redraws():
    x, y = _flaky_design()
    learner = BaseLearner()
    for s in range(60):
        rows = np.random.default_rng(s).integers(0, 8, size=8)
        if (x[rows][:, 0] == x[rows[0], 0]).all():
            with pytest.raises(DegenerateBootstrap):
                _bootstrap_fit(x, y, 2, None, np.random.default_rng(s),
                               SeedStream(s), learner, max_redraws=0)
            return
    raise AssertionError("no seed produced a degenerate first resample")


# ------------------------------------------------------------------ steps


def test_step1_importance_nonnegative_and_zero_when_never_drawn():
    ds = _toy_dataset(1, 25, 6)
    imp = rlasso_step1(ds.x, ds.y, 1, 8, SeedStream(3), BaseLearner(), 100)
    assert np.all(imp >= 0)
    drawn = imp > 0
    # with q1=1 and 8 draws over 6 variables some are never picked
    assert drawn.sum() < 6


def test_step1_signal_outranks_noise():
    ds = _toy_dataset(2, 40, 3, strength=4.0)
    imp = rlasso_step1(ds.x, ds.y, 2, 20, SeedStream(4), BaseLearner(), 100)
    assert imp[0] > imp[1] and imp[0] > imp[2]


def test_step2_only_positive_importance_is_drawn():
    ds = _toy_dataset(3, 30, 3)
    importance = np.array([1.0, 0.0, 0.0])
    beta = rlasso_step2(ds.x, ds.y, importance, 2, 10, SeedStream(5),
                        BaseLearner(), 100)
    assert beta[0] != 0
    assert beta[1] == 0 and beta[2] == 0


def test_step2_all_zero_importance_returns_zero_vector():
    ds = _toy_dataset(4, 20, 3)
    beta = rlasso_step2(ds.x, ds.y, np.zeros(3), 2, 5, SeedStream(6),
                        BaseLearner(), 100)
    assert not beta.any()


# ------------------------------------------------------------------- fit


def _small_fit(master=7, threshold=None):
    ds = _toy_dataset(5, 30, 4, strength=4.0)
    cfg = RandomLassoConfig(B=10, q1_grid=(1, 3), q2_grid=(1, 3),
                            threshold=threshold)
    return ds, rlasso_fit(ds, cfg, SeedStream(master))


def test_fit_deterministic_and_consistent():
    ds, a = _small_fit()
    _, b = _small_fit()
    assert np.array_equal(a.beta_raw, b.beta_raw)
    assert np.array_equal(a.beta_hat, b.beta_hat)
    assert a.q1_selected in a.q1_grid and a.q2_selected in a.q2_grid
    assert a.cv_errors.shape == (2, 2)
    assert np.all(np.isfinite(a.cv_errors))
    # the scan keeps the grid minimum
    assert a.cv_errors.min() == a.cv_errors[
        list(a.q1_grid).index(a.q1_selected),
        list(a.q2_grid).index(a.q2_selected)]


def test_fit_threshold_applied_to_beta_raw():
    ds, res = _small_fit()
    assert res.threshold == pytest.approx(1.0 / 30)
    expect = np.where(np.abs(res.beta_raw) >= res.threshold, res.beta_raw, 0.0)
    assert np.array_equal(res.beta_hat, expect)
    assert np.array_equal(res.selected, np.flatnonzero(res.beta_hat))


def test_fit_zero_threshold_keeps_beta_raw():
    _, res = _small_fit(threshold=0.0)
    assert np.array_equal(res.beta_hat, res.beta_raw)


def test_fit_huge_threshold_empties_selection():
    _, res = _small_fit(threshold=1e6)
    assert not res.beta_hat.any()
    assert res.selected.size == 0


def test_fit_recovers_dominant_signal():
    ds, res = _small_fit()
    assert res.beta_hat[0] > 0.5
    assert 0 in res.selected
