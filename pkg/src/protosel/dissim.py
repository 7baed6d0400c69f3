"""Dissimilarity matrices: construction, kernel conversion, rank transform
and the quantile grid used to pick ball radii.

Matrices are plain ``numpy`` arrays of shape ``(n_points, n_candidates)``.
Rows are data points, columns are candidate prototypes. When the two index
sets coincide the matrix is square with a zero diagonal.
"""

import math

import numpy as np
from scipy.spatial.distance import cdist

from .errors import InputError

METRICS = ("l1", "l2")

_CDIST_NAME = {"l1": "cityblock", "l2": "euclidean"}


def as_feature_table(features):
    x = np.asarray(features, dtype=np.float64)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
        raise InputError(f"feature table must be a non-empty 2-D array, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        bad = np.argwhere(~np.isfinite(x))[0]
        raise InputError(f"non-finite feature value at row {bad[0]}, column {bad[1]}")
    return x


def check_dissimilarity(d):
    d = np.asarray(d, dtype=np.float64)
    if d.ndim != 2:
        raise InputError(f"dissimilarity matrix must be 2-D, got shape {d.shape}")
    if not np.all(np.isfinite(d)):
        raise InputError("dissimilarity matrix contains non-finite values")
    if np.any(d < 0):
        raise InputError("dissimilarity matrix contains negative values")
    return d


def _metric_name(metric):
    m = str(metric).lower()
    if m not in METRICS:
        raise InputError(f"unknown metric {metric!r}; expected one of {METRICS}")
    return _CDIST_NAME[m]


def compute_dissimilarity(features, metric="l2"):
    """Square matrix of pairwise ``metric`` distances between the rows of ``features``."""
    x = as_feature_table(features)
    d = cdist(x, x, metric=_metric_name(metric))
    # cdist may leave rounding asymmetry for l2; the contract is exact symmetry
    d = np.minimum(d, d.T)
    np.fill_diagonal(d, 0.0)
    return d


def cross_dissimilarity(points, candidates, metric="l2"):
    """Rectangular ``(len(points), len(candidates))`` distance matrix."""
    x = as_feature_table(points)
    z = as_feature_table(candidates)
    if x.shape[1] != z.shape[1]:
        raise InputError(
            f"points have {x.shape[1]} features but candidates have {z.shape[1]}")
    return cdist(x, z, metric=_metric_name(metric))


def kernel_to_distance(kernel, tol=1e-9):
    """Turn a similarity kernel into distances, ``sqrt(K_ii + K_jj - 2 K_ij)``.

    Squared distances down to ``-tol`` are clamped to zero; anything more
    negative means the kernel is not positive semidefinite and is rejected.
    """
    k = np.asarray(kernel, dtype=np.float64)
    if k.ndim != 2 or k.shape[0] != k.shape[1] or k.shape[0] < 1:
        raise InputError(f"kernel must be a non-empty square matrix, got shape {k.shape}")
    if not np.all(np.isfinite(k)):
        raise InputError("kernel contains non-finite values")
    if np.max(np.abs(k - k.T)) > tol:
        raise InputError("kernel matrix is not symmetric")
    diag = np.diag(k)
    sq = diag[:, None] + diag[None, :] - 2.0 * k
    if np.min(sq) < -tol:
        i, j = np.unravel_index(np.argmin(sq), sq.shape)
        raise InputError(
            f"kernel gives negative squared distance {sq[i, j]:.3g} at ({i}, {j}); "
            "is it positive semidefinite?")
    d = np.sqrt(np.maximum(sq, 0.0))
    d = np.minimum(d, d.T)
    np.fill_diagonal(d, 0.0)
    return d


def rank_transform(d, training_rows=None):
    """Replace each entry by its rank among the training rows of its column.

    ``out[i, j]`` is the number of training rows ``i'`` with
    ``d[i', j] <= d[i, j]``. A ball of radius ``eps`` in the transformed
    dissimilarity therefore holds the ``floor(eps) - 1`` training points
    nearest to the candidate (ties included).
    """
    d = check_dissimilarity(d)
    if training_rows is None:
        training_rows = np.arange(d.shape[0])
    rows = np.asarray(training_rows, dtype=np.intp)
    if rows.size == 0:
        raise InputError("rank transform needs at least one training row")
    if rows.min() < 0 or rows.max() >= d.shape[0]:
        raise InputError("training row index out of range")
    ref = np.sort(d[rows], axis=0)
    out = np.empty(d.shape, dtype=np.float64)
    for j in range(d.shape[1]):
        out[:, j] = np.searchsorted(ref[:, j], d[:, j], side="right")
    return out


def positive_offdiagonal(d):
    """Strictly positive entries of ``d``, skipping the diagonal of square matrices."""
    d = check_dissimilarity(d)
    if d.shape[0] == d.shape[1]:
        mask = ~np.eye(d.shape[0], dtype=bool)
        vals = d[mask]
    else:
        vals = d.ravel()
    return vals[vals > 0]


def empirical_quantile(sorted_values, p):
    """Type-1 (inverse empirical CDF) quantile of an ascending sample.

    Returns the smallest sample value ``v`` with ``P(X <= v) >= p``.
    """
    n = len(sorted_values)
    # guard against p*n landing a hair above an integer
    k = math.ceil(p * n - 1e-9)
    return float(sorted_values[min(max(k, 1), n) - 1])


def distance_quantiles(d, probs):
    """Quantiles of the positive off-diagonal dissimilarities, one per prob."""
    probs = [float(p) for p in np.atleast_1d(probs)]
    if not probs:
        raise InputError("need at least one quantile level")
    if any(not 0.0 <= p <= 1.0 for p in probs):
        raise InputError(f"quantile levels must lie in [0, 1], got {probs}")
    pool = np.sort(positive_offdiagonal(d))
    if pool.size == 0:
        raise InputError("all off-diagonal dissimilarities are zero")
    return [empirical_quantile(pool, p) for p in probs]


def default_grid(d, size=20, upper=0.5):
    """``size`` equally spaced quantile levels from 0 to ``upper`` (min to median)."""
    if size < 1:
        raise InputError("grid size must be at least 1")
    probs = np.linspace(0.0, upper, size) if size > 1 else np.array([0.0])
    eps = distance_quantiles(d, probs)
    # duplicate quantiles would repeat identical CV cells
    return sorted(set(eps))
