"""Nearest-prototype classification.

A query goes to the class owning its closest prototype. Queries are given
as dissimilarity rows against the full candidate set, so the classifier
never needs to know the metric.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InputError, StateError


@dataclass(frozen=True)
class Prediction:
    labels: np.ndarray
    margins: np.ndarray  # (q, L) nearest-prototype dissimilarity per class, inf if none


@dataclass(frozen=True)
class ClassifierReport:
    error: float
    confusion: np.ndarray  # confusion[true, predicted]
    predictions: np.ndarray


def _sets_of(solution):
    return getattr(solution, "sets", solution)


def predict(solution, dissims):
    """Class index (lowest wins ties) of the nearest prototype for each query row."""
    sets = _sets_of(solution)
    d = np.atleast_2d(np.asarray(dissims, dtype=np.float64))
    if not any(len(s) for s in sets):
        raise StateError("cannot classify: every prototype set is empty")
    margins = np.full((d.shape[0], len(sets)), np.inf)
    for l, s in enumerate(sets):
        if len(s):
            s = np.asarray(s, dtype=np.intp)
            if s.max() >= d.shape[1]:
                raise InputError(
                    f"query rows have {d.shape[1]} candidate columns but class {l} "
                    f"uses candidate {int(s.max())}")
            margins[:, l] = d[:, s].min(axis=1)
    return Prediction(labels=np.argmin(margins, axis=1), margins=margins)


def evaluate_classifier(solution, test_dissims, test_labels, n_classes=None):
    sets = _sets_of(solution)
    L = len(sets) if n_classes is None else n_classes
    y = np.asarray(test_labels, dtype=np.intp).ravel()
    d = np.atleast_2d(np.asarray(test_dissims, dtype=np.float64))
    if d.shape[0] != y.size:
        raise InputError(f"{d.shape[0]} query rows but {y.size} test labels")
    if y.size and (y.min() < 0 or y.max() >= L):
        raise InputError(f"test labels must lie in [0, {L})")
    pred = predict(sets, d).labels
    confusion = np.zeros((L, L), dtype=np.int64)
    np.add.at(confusion, (y, pred), 1)
    error = float(np.mean(pred != y)) if y.size else 0.0
    return ClassifierReport(error=error, confusion=confusion, predictions=pred)
