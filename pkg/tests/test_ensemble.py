import numpy as np
import pytest

from strands.cluster import MODE_NONE, MODE_RANDOM, Clustering, no_cluster
from strands.data import Dataset, standardize
from strands.ensemble import (RANK_BY_COEFFICIENT, RANK_BY_PROBABILITY,
                              Step1Result, StrandsConfig, build_lambda_pool,
                              step1_explore, step2_select, step_diagnostic,
                              strands_fit, threshold_select)
from strands.errors import EmptyEnsemble
from strands.seeding import SeedStream
from strands.simbench import build_scenario, sample_dataset
from strands.solvers import BaseLearner, PenaltySpec


def _signal_dataset(seed, n, p, strength=3.0):
    rng = np.random.default_rng(seed)
    raw = rng.normal(size=(n, p))
    y = strength * raw[:, 0] + rng.normal(size=n)
    if p > 1:
        y = y + (strength / 2.0) * raw[:, 1]
    return standardize(raw, y)


# ------------------------------------------------------------------ step 1


def test_step1_single_variable_sampling_matches_rng_exactly():
    ds = _signal_dataset(0, 40, 1)
    B = 10
    seed = SeedStream(5)
    out = step1_explore(ds, no_cluster(1), BaseLearner(), B, seed)
    expected_m = sum(
        int(seed.child(b, 0).generator().integers(0, 2)) for b in range(B))
    assert out.m_counts[0] == expected_m
    assert 0 < expected_m < B  # seed chosen to exercise both outcomes
    # the lone strong signal is kept by every sub-fit
    assert out.theta[0] == pytest.approx(1.0)
    assert out.alpha[0] > 0
    assert out.lambdas.size == expected_m


def test_step1_group_draws_respect_group_membership():
    # two groups; a variable outside a drawn group never appears in
    # that group's slots, so m stays within [0, B]
    ds = _signal_dataset(1, 50, 6)
    clus = Clustering(groups=(np.array([0, 1, 2, 3]), np.array([4, 5])),
                      rho0=0.5, mode="correlation")
    out = step1_explore(ds, clus, BaseLearner(), 40, SeedStream(2))
    assert np.all(out.m_counts >= 0) and np.all(out.m_counts <= 40)
    assert np.all((0 <= out.theta) & (out.theta <= 1))
    assert np.all(out.alpha >= 0)
    # alpha positive requires theta positive
    assert np.all(out.theta[out.alpha > 0] > 0)


def test_step1_never_sampled_variable_gets_zero_scores():
    ds = _signal_dataset(2, 30, 4)
    for master in range(60):
        try:
            out = step1_explore(ds, no_cluster(4), BaseLearner(), 1,
                                SeedStream(master))
        except EmptyEnsemble:
            continue
        missed = out.m_counts == 0
        if missed.any():
            assert not out.alpha[missed].any()
            assert not out.theta[missed].any()
            return
    raise AssertionError("no 1-iteration draw left a variable out")


def test_step1_mean_inclusion_near_half_without_clustering():
    ds = _signal_dataset(3, 40, 12)
    B = 200
    out = step1_explore(ds, no_cluster(12), BaseLearner(), B, SeedStream(9))
    assert np.mean(out.m_counts) / B == pytest.approx(0.5, abs=0.06)


def test_step1_empty_every_iteration_raises():
    ds = _signal_dataset(4, 30, 1)
    for master in range(40):
        size = SeedStream(master).child(0, 0).generator().integers(0, 2)
        if size == 0:
            with pytest.raises(EmptyEnsemble):
                step1_explore(ds, no_cluster(1), BaseLearner(), 1, SeedStream(master))
            return
    raise AssertionError("no master seed drew the empty subset")


# ------------------------------------------------------------------- pool


def test_lambda_pool_sorted_descending_deduplicated():
    pool = build_lambda_pool(1.0, np.array([0.5, 1.0 + 1e-12, 0.25, 0.5]))
    # the near-duplicate of the base winner collapses to one entry, the
    # survivor being whichever sorted first (the marginally larger one)
    assert np.array_equal(pool, [1.0 + 1e-12, 0.5, 0.25])


def test_lambda_pool_keeps_distinct_near_values():
    pool = build_lambda_pool(1.0, np.array([0.999999]))
    assert pool.size == 2


def test_lambda_pool_always_contains_base_winner():
    pool = build_lambda_pool(0.123, np.array([0.5, 0.007]))
    assert 0.123 in pool


# ------------------------------------------------------------------ step 2


def test_step2_forced_set_when_positive_weights_equal_s_tilde():
    ds = _signal_dataset(10, 60, 4)
    step1 = Step1Result(m_counts=np.array([20, 20, 20, 20]),
                        alpha=np.array([2.0, 1.0, 0.0, 0.0]),
                        theta=np.array([1.0, 0.6, 0.0, 0.0]),
                        lambdas=np.empty(0))
    lam_max = float(np.abs(ds.x.T @ ds.y).max() / ds.n)
    pool = np.array([0.5 * lam_max, 0.05 * lam_max])
    B = 12
    beta_hat, pi_hat, s_tilde, reduced, lams = step2_select(
        ds, step1, pool, BaseLearner(), B, SeedStream(3))
    assert s_tilde == 2 and not reduced
    assert not pi_hat[2:].any() and not beta_hat[2:].any()
    assert np.all(np.isfinite(lams))
    assert all(lam in pool for lam in lams)
    # both strong columns survive every refit here
    assert pi_hat[0] == pytest.approx(1.0)


def test_step2_s_tilde_reduced_to_positive_weight_count():
    ds = _signal_dataset(11, 50, 4)
    step1 = Step1Result(m_counts=np.full(4, 10),
                        alpha=np.array([1.0, 0.0, 1.0, 0.0]),
                        theta=np.array([1.0, 1.0, 1.0, 0.0]),
                        lambdas=np.empty(0))
    beta_hat, pi_hat, s_tilde, reduced, _ = step2_select(
        ds, step1, np.array([0.05]), BaseLearner(), 6, SeedStream(4))
    assert reduced
    assert s_tilde == 2
    assert not pi_hat[[1, 3]].any()


def test_step2_nothing_positive_yields_zero_averages():
    ds = _signal_dataset(12, 30, 3)
    step1 = Step1Result(m_counts=np.full(3, 4), alpha=np.zeros(3),
                        theta=np.zeros(3), lambdas=np.empty(0))
    beta_hat, pi_hat, s_tilde, reduced, lams = step2_select(
        ds, step1, np.array([0.1]), BaseLearner(), 5, SeedStream(5))
    assert s_tilde == 0 and not reduced
    assert not beta_hat.any() and not pi_hat.any()
    assert np.all(np.isnan(lams))


# ------------------------------------------------------------- threshold


def test_threshold_select_by_probability_hand_case():
    s0, sel = threshold_select(np.array([0.9, 0.4, 0.6]), np.zeros(3), 0.5)
    assert s0 == 2
    assert sel.tolist() == [0, 2]


def test_threshold_select_all_below_threshold_empty():
    s0, sel = threshold_select(np.array([0.2, 0.4, 0.1]), np.ones(3), 0.5)
    assert s0 == 0 and sel.size == 0


def test_threshold_select_by_coefficient_hand_case():
    s0, sel = threshold_select(np.array([0.6, 0.6, 0.2]),
                               np.array([0.1, -2.0, 3.0]), 0.5,
                               RANK_BY_COEFFICIENT)
    assert s0 == 2
    assert sel.tolist() == [1, 2]


def test_threshold_select_tie_breaks_to_lower_index():
    s0, sel = threshold_select(np.array([0.5, 0.9, 0.5, 0.5]), np.zeros(4), 0.6)
    assert s0 == 1 and sel.tolist() == [1]
    s0, sel = threshold_select(np.array([0.6, 0.6, 0.1]),
                               np.array([-2.0, 1.0, 2.0]), 0.5,
                               RANK_BY_COEFFICIENT)
    assert s0 == 2
    assert sel.tolist() == [0, 2]


def test_threshold_boundary_value_counts():
    s0, sel = threshold_select(np.array([0.5, 0.49999]), np.zeros(2), 0.5)
    assert s0 == 1 and sel.tolist() == [0]


# ---------------------------------------------------------------- pipeline


def test_config_validation():
    with pytest.raises(ValueError):
        StrandsConfig(B=0)
    with pytest.raises(ValueError):
        StrandsConfig(rho0=0.0)
    with pytest.raises(ValueError):
        StrandsConfig(pi_threshold=1.5)
    with pytest.raises(ValueError):
        StrandsConfig(clustering_mode="spectral")
    with pytest.raises(ValueError):
        StrandsConfig(rank_by="alphabetical")


def test_strands_fit_deterministic_and_internally_consistent():
    draw = sample_dataset(build_scenario("example3"), SeedStream(21))
    cfg = StrandsConfig(B=25)
    a = strands_fit(draw.dataset, cfg, seed=SeedStream(13))
    b = strands_fit(draw.dataset, cfg, seed=SeedStream(13))
    assert np.array_equal(a.beta_hat, b.beta_hat)
    assert np.array_equal(a.pi_hat, b.pi_hat)
    assert np.array_equal(a.selected, b.selected)
    assert a.s0_hat == len(a.selected)
    assert np.all((0 <= a.pi_hat) & (a.pi_hat <= 1))
    assert not a.beta_hat[a.pi_hat == 0].any()
    assert 0 <= a.s_tilde <= draw.dataset.p
    finite = a.step2_lambdas[np.isfinite(a.step2_lambdas)]
    assert all(lam in a.lambda_pool for lam in finite)
    scored = a.scored_coefficients()
    off = np.setdiff1d(np.arange(draw.dataset.p), a.selected)
    assert not scored[off].any()
    assert np.array_equal(scored[a.selected], a.beta_hat[a.selected])


def test_strands_fit_finds_dominant_signals():
    ds = _signal_dataset(30, 80, 8, strength=4.0)
    res = strands_fit(ds, StrandsConfig(B=40), seed=SeedStream(1))
    assert 0 in res.selected and 1 in res.selected


def test_strands_clustering_modes():
    draw = sample_dataset(build_scenario("example3"), SeedStream(22))
    cfg_c = StrandsConfig(B=8)
    cfg_n = StrandsConfig(B=8, clustering_mode=MODE_NONE)
    cfg_r = StrandsConfig(B=8, clustering_mode=MODE_RANDOM)
    res_c = strands_fit(draw.dataset, cfg_c, seed=SeedStream(2))
    res_n = strands_fit(draw.dataset, cfg_n, seed=SeedStream(2))
    res_r = strands_fit(draw.dataset, cfg_r, seed=SeedStream(2))
    assert res_n.clustering.mode == MODE_NONE
    assert res_n.clustering.k_count == 0
    assert res_r.clustering.mode == MODE_RANDOM
    # the scramble preserves the correlation template's group sizes
    assert sorted(len(g) for g in res_r.clustering.groups) == \
        sorted(len(g) for g in res_c.clustering.groups)


def test_strands_rank_by_coefficient_selects_s0_many():
    ds = _signal_dataset(31, 60, 6)
    res = strands_fit(ds, StrandsConfig(B=20, rank_by=RANK_BY_COEFFICIENT),
                      seed=SeedStream(3))
    assert res.config.rank_by == RANK_BY_COEFFICIENT
    assert res.s0_hat == len(res.selected)


# -------------------------------------------------------------- diagnostic


def test_step_diagnostic_shape_and_ranges():
    draw = sample_dataset(build_scenario("example3"), SeedStream(23))
    res = strands_fit(draw.dataset, StrandsConfig(B=10), seed=SeedStream(4))
    table = step_diagnostic(res)
    assert table["j"].shape == (40,)
    assert "relevant" not in table
    assert np.all((0 <= table["theta"]) & (table["theta"] <= 1))
    assert np.all((0 <= table["pi_hat"]) & (table["pi_hat"] <= 1))
    assert np.all(table["abs_beta"] >= 0)
    labeled = step_diagnostic(res, relevant=draw.positions)
    assert labeled["relevant"].sum() == draw.positions.size
    assert set(np.flatnonzero(labeled["relevant"])) == set(draw.positions)
    masked = step_diagnostic(res, relevant=draw.beta_true != 0)
    assert np.array_equal(masked["relevant"], labeled["relevant"])
