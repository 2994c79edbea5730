import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from strands.data import correlation_matrix, pearson, standardize
from strands.errors import ConstantColumn, DimensionMismatch


def test_identity_case_passes_through():
    rng = np.random.default_rng(0)
    raw = rng.normal(size=(200, 4))
    raw -= raw.mean(axis=0)
    raw /= raw.std(axis=0)
    y = rng.normal(size=200)
    y -= y.mean()
    ds = standardize(raw, y)
    assert np.allclose(ds.x, raw, atol=1e-12)
    assert np.allclose(ds.y, y, atol=1e-12)


def test_single_column_hand_values():
    # sd uses the population divisor n: sd(1,2,3) = sqrt(2/3)
    ds = standardize(np.array([[1.0], [2.0], [3.0]]), np.array([2.0, 4.0, 6.0]))
    sd = np.sqrt(2.0 / 3.0)
    assert ds.column_means[0] == pytest.approx(2.0)
    assert ds.column_sds[0] == pytest.approx(sd)
    assert np.allclose(ds.x[:, 0], np.array([-1.0, 0.0, 1.0]) / sd)
    assert ds.y_mean == pytest.approx(4.0)
    assert np.allclose(ds.y, [-2.0, 0.0, 2.0])


def test_standardized_columns_unit_diag_gram():
    rng = np.random.default_rng(3)
    ds = standardize(rng.normal(size=(57, 9)) * 11 + 4, rng.normal(size=57))
    gram_diag = (ds.x * ds.x).sum(axis=0) / ds.n
    assert np.allclose(gram_diag, 1.0, atol=1e-12)


def test_constant_column_rejected():
    raw = np.ones((10, 3))
    raw[:, 0] = np.arange(10)
    raw[:, 2] = np.arange(10) ** 2
    with pytest.raises(ConstantColumn) as err:
        standardize(raw, np.arange(10.0))
    assert err.value.column == 1


def test_row_count_mismatch_rejected():
    with pytest.raises(DimensionMismatch):
        standardize(np.ones((5, 2)) + np.arange(5)[:, None], np.ones(4))


def test_fewer_than_two_rows_rejected():
    with pytest.raises(DimensionMismatch):
        standardize(np.array([[1.0, 2.0]]), np.array([1.0]))


def test_round_trip_recovers_raw_columns():
    rng = np.random.default_rng(8)
    raw = rng.normal(size=(40, 6)) * rng.uniform(0.5, 20, size=6) + rng.normal(size=6)
    ds = standardize(raw, rng.normal(size=40))
    rebuilt = ds.x * ds.column_sds + ds.column_means
    assert np.allclose(rebuilt, raw, atol=1e-10)


def test_pearson_self_and_negation():
    a = np.array([0.3, -1.2, 4.4, 2.0, -0.5])
    assert pearson(a, a) == pytest.approx(1.0)
    assert pearson(a, -a) == pytest.approx(-1.0)


def test_pearson_hand_value():
    assert pearson(np.array([1.0, 2, 3, 4]), np.array([1.0, 3, 2, 4])) == pytest.approx(0.8)


def test_pearson_rejects_constant_input():
    with pytest.raises(ConstantColumn):
        pearson(np.ones(5), np.arange(5.0))


@settings(max_examples=50, deadline=None)
@given(
    st.lists(st.floats(-50, 50), min_size=3, max_size=12),
    st.floats(0.1, 5.0),
    st.floats(-10, 10),
)
def test_pearson_symmetric_and_affine_invariant(values, slope, shift):
    rng = np.random.default_rng(42)
    a = np.asarray(values)
    b = a + rng.normal(size=a.size)  # decorrelate without constancy risk
    if a.std() == 0 or b.std() == 0:
        return
    r = pearson(a, b)
    assert pearson(b, a) == pytest.approx(r, abs=1e-12)
    assert pearson(slope * a + shift, b) == pytest.approx(r, abs=1e-9)


def test_correlation_matrix_matches_pairwise_pearson():
    rng = np.random.default_rng(5)
    x = rng.normal(size=(30, 5))
    r = correlation_matrix(x)
    assert np.allclose(np.diag(r), 1.0)
    for i in range(5):
        for j in range(i):
            assert r[i, j] == pytest.approx(pearson(x[:, i], x[:, j]), abs=1e-12)
    assert np.allclose(r, r.T)
