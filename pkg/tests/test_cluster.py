import numpy as np
import pytest

from strands.cluster import (MODE_CORRELATION, MODE_NONE, MODE_RANDOM,
                             Clustering, cluster_from_support,
                             correlation_cluster, median_abs_correlation,
                             no_cluster, random_cluster)
from strands.data import standardize
from strands.seeding import SeedStream
from strands.simbench import build_scenario, sample_dataset


def _block_corr(p, block, rho):
    corr = np.eye(p)
    for i in block:
        for j in block:
            if i != j:
                corr[i, j] = rho
    return corr


def test_partition_validation():
    with pytest.raises(ValueError):
        Clustering(groups=(np.array([0, 1]), np.array([1, 2])), rho0=0.5,
                   mode=MODE_CORRELATION)  # overlap
    with pytest.raises(ValueError):
        Clustering(groups=(np.array([0, 2]),), rho0=0.5, mode=MODE_CORRELATION)  # gap
    with pytest.raises(ValueError):
        Clustering(groups=(np.array([0, 1]), np.array([2])), rho0=0.5,
                   mode=MODE_CORRELATION)  # singleton committed group
    with pytest.raises(ValueError):
        Clustering(groups=(np.array([0]),), rho0=0.5, mode="spectral")


def test_median_abs_correlation_hand_cases():
    rng = np.random.default_rng(0)
    z = rng.normal(size=(4000, 3))
    # col2 = -0.7-ish correlated with col0, col1 independent
    raw = np.stack([z[:, 0], z[:, 1], -0.7 * z[:, 0] + np.sqrt(1 - 0.49) * z[:, 2]], axis=1)
    ds = standardize(raw, rng.normal(size=4000))
    single = median_abs_correlation(ds, 2, [0])
    assert single == pytest.approx(0.7, abs=0.05)
    assert single >= 0.0
    # even-sized group: median is the mean of the two central values
    both = median_abs_correlation(ds, 2, [0, 1])
    lo = median_abs_correlation(ds, 2, [1])
    assert both == pytest.approx((single + lo) / 2.0, abs=1e-12)


def test_median_abs_correlation_orthogonal_candidate():
    raw = np.array([[1.0, 0.0, 1.0],
                    [-1.0, 0.0, -1.0],
                    [0.0, 1.0, 1.0],
                    [0.0, -1.0, -1.0]])
    ds = standardize(raw, np.zeros(4) + np.arange(4))
    assert median_abs_correlation(ds, 1, [0]) == pytest.approx(0.0, abs=1e-12)


def test_median_abs_correlation_validates_group():
    ds = standardize(np.random.default_rng(1).normal(size=(10, 3)), np.arange(10.0))
    with pytest.raises(ValueError):
        median_abs_correlation(ds, 0, [])
    with pytest.raises(ValueError):
        median_abs_correlation(ds, 0, [0, 1])


def test_empty_support_leaves_everything_independent():
    corr = _block_corr(6, [0, 1, 2], 0.9)
    out = cluster_from_support(corr, np.array([], dtype=int), rho0=0.5)
    assert out.k_count == 0
    assert np.array_equal(out.groups[0], np.arange(6))


def test_low_correlation_stalls_every_seed():
    corr = _block_corr(5, [], 0.0)
    out = cluster_from_support(corr, np.array([0, 3]), rho0=0.5)
    assert out.k_count == 0
    assert np.array_equal(out.groups[0], np.arange(5))


def test_exact_block_recovered_from_one_seed():
    corr = _block_corr(8, [1, 4, 6], 0.8)
    out = cluster_from_support(corr, np.array([4]), rho0=0.5)
    assert out.k_count == 1
    assert np.array_equal(out.groups[1], [1, 4, 6])
    assert np.array_equal(out.groups[0], [0, 2, 3, 5, 7])
    assert out.mode == MODE_CORRELATION


def test_second_seed_in_absorbed_block_is_skipped():
    corr = _block_corr(8, [1, 4, 6], 0.8)
    out = cluster_from_support(corr, np.array([1, 6]), rho0=0.5)
    assert out.k_count == 1


def test_two_disjoint_blocks_two_groups():
    corr = _block_corr(10, [0, 1, 2], 0.9)
    corr2 = _block_corr(10, [5, 6], 0.7)
    corr = np.where(np.eye(10) == 1, 1.0, np.maximum(corr, corr2))
    out = cluster_from_support(corr, np.array([0, 5]), rho0=0.5)
    assert out.k_count == 2
    assert np.array_equal(out.groups[1], [0, 1, 2])
    assert np.array_equal(out.groups[2], [5, 6])


def test_audit_records_threshold_satisfaction():
    corr = _block_corr(8, [1, 4, 6], 0.8)
    out = cluster_from_support(corr, np.array([4]), rho0=0.5)
    (audit,) = out.audit
    assert audit[0][0] == 4 and np.isnan(audit[0][1])
    for _, rho in audit[1:]:
        assert rho >= out.rho0


def test_greedy_ties_take_lowest_index():
    # two candidates equally correlated with the seed
    corr = np.eye(4)
    for pair in ((0, 1), (0, 2)):
        corr[pair] = corr[pair[::-1]] = 0.8
    out = cluster_from_support(corr, np.array([0]), rho0=0.5)
    assert out.audit[0][1][0] == 1


def test_correlation_cluster_deterministic_under_seed():
    scen = build_scenario("example3")
    draw = sample_dataset(scen, SeedStream(5))
    a = correlation_cluster(draw.dataset, rho0=0.5, seed=SeedStream(9))
    b = correlation_cluster(draw.dataset, rho0=0.5, seed=SeedStream(9))
    assert a.to_dict() == b.to_dict()


def test_block_recovery_rate_on_correlated_design():
    # one ten-variable block at rho 0.9 among 30 independent columns:
    # when the base fit touches the block, the committed group should
    # be exactly that block nearly always
    scen = build_scenario("example3")
    block = set(range(10))
    hits = tried = 0
    for r in range(200):
        draw = sample_dataset(scen, SeedStream(77).child(r))
        clus = correlation_cluster(draw.dataset, rho0=0.5, seed=SeedStream(78).child(r))
        tried += 1
        if clus.k_count == 1 and set(clus.groups[1].tolist()) == block:
            hits += 1
    assert tried == 200
    assert hits / tried >= 0.95


def test_random_cluster_preserves_size_multiset():
    template = Clustering(groups=(np.arange(30), np.arange(30, 40)), rho0=0.5,
                          mode=MODE_CORRELATION)
    for i in range(20):
        rc = random_cluster(template, SeedStream(3).child(i))
        assert rc.mode == MODE_RANDOM
        assert [len(g) for g in rc.groups] == [30, 10]
        assert np.array_equal(np.sort(np.concatenate(rc.groups)), np.arange(40))


def test_random_cluster_trivial_template_unchanged():
    template = no_cluster(12)
    rc = random_cluster(template, SeedStream(1))
    assert rc.k_count == 0
    assert np.array_equal(rc.groups[0], np.arange(12))


def test_random_cluster_membership_uniform():
    # each of 40 variables should land in the size-10 slot about 1/4
    # of the time
    template = Clustering(groups=(np.arange(30), np.arange(30, 40)), rho0=0.5,
                          mode=MODE_CORRELATION)
    counts = np.zeros(40)
    n_seeds = 1000
    for i in range(n_seeds):
        rc = random_cluster(template, SeedStream(11).child(i))
        counts[rc.groups[1]] += 1
    freq = counts / n_seeds
    assert np.all(np.abs(freq - 0.25) <= 0.04)


def test_no_cluster_shapes():
    single = no_cluster(1)
    assert single.k_count == 0 and single.groups[0].tolist() == [0]
    assert single.mode == MODE_NONE
    big = no_cluster(300)
    assert big.k_count == 0 and big.groups[0].size == 300
    with pytest.raises(ValueError):
        no_cluster(0)


def test_to_dict_round_trips_membership():
    corr = _block_corr(6, [2, 3], 0.9)
    out = cluster_from_support(corr, np.array([2]), rho0=0.5)
    d = out.to_dict()
    assert d["k_count"] == 1
    assert d["groups"][1] == [2, 3]
    assert d["mode"] == MODE_CORRELATION
    assert d["rho0"] == 0.5
