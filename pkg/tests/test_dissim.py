import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from protosel.dissim import (compute_dissimilarity, cross_dissimilarity, default_grid,
                             distance_quantiles, kernel_to_distance, rank_transform)
from protosel.errors import InputError


def test_one_dimensional_l2():
    np.testing.assert_array_equal(compute_dissimilarity([[0], [3]], "l2"), [[0, 3], [3, 0]])


@pytest.mark.parametrize("metric, expected", [("l1", 2.0), ("l2", np.sqrt(2))])
def test_unit_diagonal(metric, expected):
    d = compute_dissimilarity([[0, 0], [1, 1]], metric)
    assert d[0, 1] == pytest.approx(expected)
    assert d[1, 0] == pytest.approx(expected)
    assert d[0, 0] == d[1, 1] == 0


@pytest.mark.parametrize("metric", ["l1", "l2"])
def test_matches_double_loop(metric):
    rng = np.random.default_rng(3)
    x = rng.normal(size=(10, 4))
    d = compute_dissimilarity(x, metric)
    for i in range(10):
        for j in range(10):
            diff = [abs(a - b) for a, b in zip(x[i], x[j])]
            ref = sum(diff) if metric == "l1" else sum(v * v for v in diff) ** 0.5
            assert d[i, j] == pytest.approx(ref, abs=1e-12)


def test_rejects_nonfinite_features():
    with pytest.raises(InputError):
        compute_dissimilarity([[0.0, np.nan], [1, 1]])
    with pytest.raises(InputError):
        compute_dissimilarity([[0.0, 1.0], [np.inf, 1]])


def test_rejects_unknown_metric():
    with pytest.raises(InputError):
        compute_dissimilarity([[0.0], [1.0]], "cosine")


@pytest.mark.parametrize("metric", ["l1", "l2"])
def test_metric_properties(metric):
    rng = np.random.default_rng(11)
    x = rng.normal(size=(20, 3))
    d = compute_dissimilarity(x, metric)
    np.testing.assert_array_equal(d, d.T)
    assert np.all(np.diag(d) == 0)
    for i, j, k in itertools.product(range(20), repeat=3):
        assert d[i, k] <= d[i, j] + d[j, k] + 1e-12


def test_cross_dissimilarity_shape_and_mismatch():
    assert cross_dissimilarity(np.zeros((3, 2)), np.ones((4, 2))).shape == (3, 4)
    with pytest.raises(InputError):
        cross_dissimilarity(np.zeros((3, 2)), np.ones((4, 3)))


def test_kernel_identity():
    d = kernel_to_distance(np.eye(3))
    off = ~np.eye(3, dtype=bool)
    np.testing.assert_allclose(d[off], np.sqrt(2))
    assert np.all(np.diag(d) == 0)


def test_kernel_all_ones():
    np.testing.assert_array_equal(kernel_to_distance(np.ones((4, 4))), np.zeros((4, 4)))


def test_kernel_half():
    d = kernel_to_distance([[1, 0.5], [0.5, 1]])
    assert d[0, 1] == pytest.approx(1.0)


def test_kernel_rejects_asymmetric_and_non_psd():
    with pytest.raises(InputError):
        kernel_to_distance([[1, 0.5], [0.4, 1]])
    with pytest.raises(InputError):
        kernel_to_distance([[0, 1], [1, 0]])


def test_kernel_clamps_tiny_negative():
    k = np.array([[1.0, 1.0 + 4e-10], [1.0 + 4e-10, 1.0]])
    assert kernel_to_distance(k)[0, 1] == 0.0


def test_kernel_of_gram_matrix_is_euclidean():
    rng = np.random.default_rng(5)
    phi = rng.normal(size=(12, 5))
    np.testing.assert_allclose(kernel_to_distance(phi @ phi.T),
                               compute_dissimilarity(phi, "l2"), atol=1e-9)


def test_rank_example_column():
    d = np.array([10, 9, 8, 0, 1.0])[:, None]
    r = rank_transform(d)
    assert r[4, 0] == 2
    assert r[3, 0] == 1
    assert r[0, 0] == 5


def test_rank_ties_counted():
    d = np.array([[3.0], [1.0], [3.0]])
    r = rank_transform(d)
    assert r[0, 0] == r[2, 0] == 3


def test_rank_query_rows_against_training_rows():
    d = np.array([[0.0], [2.0], [4.0], [3.0]])
    r = rank_transform(d, training_rows=[0, 1, 2])
    assert r[:, 0].tolist() == [1, 2, 3, 2]


def test_rank_rejects_empty_training():
    with pytest.raises(InputError):
        rank_transform(np.ones((2, 2)), training_rows=[])


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, (8, 3), elements=st.integers(0, 5).map(float)))
def test_rank_preserves_column_order(d):
    r = rank_transform(d)
    assert r.max() <= 8
    assert r.min() >= 1
    for j in range(3):
        for a in range(8):
            for b in range(8):
                assert (d[a, j] <= d[b, j]) == (r[a, j] <= r[b, j])


def _type1_oracle(values, p):
    vals = sorted(values)
    n = len(vals)
    for v in vals:
        if sum(1 for u in vals if u <= v) / n >= p - 1e-12:
            return v
    return vals[-1]


def test_quantiles_min_max():
    d = np.array([[0, 1, 2], [1, 0, 3], [2, 3, 0.0]])
    assert distance_quantiles(np.array([[0, 1], [4, 0.0]]), [0, 1]) == [1.0, 4.0]
    assert distance_quantiles(d, [0.0, 1.0]) == [1.0, 3.0]


def test_quantile_median_is_lower_value():
    d = np.array([[0, 1, 2], [3, 0, 4.0]])
    # rectangular: pool {1,2,3,4}
    assert distance_quantiles(d, [0.5]) == [2.0]
    assert _type1_oracle([1, 2, 3, 4], 0.5) == 2


def test_quantiles_constant_sample():
    d = np.array([[0, 2, 2], [2, 0, 0], [0, 0, 0.0]])
    for p in (0.0, 0.3, 1.0):
        assert distance_quantiles(d, [p]) == [2.0]


def test_quantiles_reject_all_zero_and_bad_probs():
    with pytest.raises(InputError):
        distance_quantiles(np.zeros((3, 3)), [0.5])
    with pytest.raises(InputError):
        distance_quantiles(np.ones((3, 3)), [1.5])
    with pytest.raises(InputError):
        distance_quantiles(np.ones((3, 3)), [])


@settings(max_examples=80, deadline=None)
@given(st.lists(st.integers(1, 20), min_size=2, max_size=25),
       st.floats(0, 1), st.floats(0, 1))
def test_quantiles_match_oracle_and_are_monotone(values, p, q):
    d = np.array(values, dtype=float)[None, :]
    lo, hi = sorted((p, q))
    got = distance_quantiles(d, [lo, hi])
    assert got[0] <= got[1]
    assert got[0] == _type1_oracle(values, lo)
    assert got[1] == _type1_oracle(values, hi)


def test_quantiles_skip_zero_offdiagonal():
    x = np.array([[0.0], [0.0], [1.0]])
    d = compute_dissimilarity(x)
    assert distance_quantiles(d, [0.0]) == [1.0]


def test_default_grid_spans_min_to_median():
    rng = np.random.default_rng(0)
    d = compute_dissimilarity(rng.normal(size=(15, 2)))
    grid = default_grid(d, 20)
    pos = d[~np.eye(15, dtype=bool)]
    assert grid[0] == pos.min()
    assert grid[-1] <= np.median(pos) + 1e-12
    assert grid == sorted(grid)
