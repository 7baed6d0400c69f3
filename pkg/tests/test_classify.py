import numpy as np
import pytest

from protosel.classify import evaluate_classifier, predict
from protosel.errors import InputError, StateError

from conftest import TOY_X


def toy_query(q):
    return np.abs(np.asarray(q, dtype=float)[:, None] - TOY_X[None, :])


def test_toy_queries():
    pred = predict([[1], [3]], toy_query([5.9, 5.5]))
    np.testing.assert_allclose(pred.margins, [[4.9, 4.1], [4.5, 4.5]])
    assert pred.labels.tolist() == [1, 0]


def test_empty_class_gets_infinite_margin():
    pred = predict([[1], []], toy_query([10.0]))
    assert pred.margins[0, 1] == np.inf
    assert pred.labels.tolist() == [0]


def test_all_empty_rejected():
    with pytest.raises(StateError):
        predict([[], []], toy_query([1.0]))


def test_column_mismatch_rejected():
    with pytest.raises(InputError):
        predict([[7]], np.zeros((2, 3)))


def nn_reference(d, y):
    """1-NN: nearest training point, lowest class on distance ties."""
    out = []
    for row in d:
        best = min(row)
        out.append(min(y[j] for j in range(len(row)) if row[j] == best))
    return out


def test_all_points_as_prototypes_is_one_nn():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(30, 2))
    y = rng.integers(0, 3, 30)
    q = rng.normal(size=(200, 2))
    d = np.sqrt(((q[:, None] - x[None]) ** 2).sum(-1))
    sets = [np.flatnonzero(y == l).tolist() for l in range(3)]
    assert predict(sets, d).labels.tolist() == nn_reference(d, y.tolist())


def test_scaling_invariance():
    rng = np.random.default_rng(1)
    d = rng.uniform(0, 5, size=(50, 12))
    sets = [[0, 3], [5], [7, 8, 11]]
    assert np.array_equal(predict(sets, d).labels, predict(sets, 3.7 * d).labels)


def test_singleton_sets_are_nearest_centroid():
    rng = np.random.default_rng(2)
    d = rng.uniform(0, 5, size=(40, 3))
    pred = predict([[0], [1], [2]], d)
    assert pred.labels.tolist() == np.argmin(d, axis=1).tolist()


def test_perfect_predictions():
    d = toy_query([0.0, 10.0, 11.0])
    rep = evaluate_classifier([[1], [3]], d, [0, 1, 1])
    assert rep.error == 0
    assert rep.confusion.tolist() == [[1, 0], [0, 2]]


def test_single_class_predictions_on_balanced_set():
    d = np.tile([0.0, 9.0], (6, 1))
    rep = evaluate_classifier([[0], [1]], d, [0, 0, 0, 1, 1, 1])
    assert rep.error == 0.5
    assert rep.confusion.tolist() == [[3, 0], [3, 0]]


def test_toy_self_classification():
    rep = evaluate_classifier([[1], [3]], toy_query(TOY_X), [0, 0, 0, 1, 1])
    assert rep.error == 0


def test_dimension_mismatch():
    with pytest.raises(InputError):
        evaluate_classifier([[1], [3]], toy_query([1.0, 2.0]), [0])
    with pytest.raises(InputError):
        evaluate_classifier([[1], [3]], toy_query([1.0]), [2])
