"""Model selection around the prototype solvers: stratified folds,
cross-validation over a grid of ball radii with the one-standard-error
rule, and optional augmentation of the candidate set with per-class
k-means centroids.
"""

import json
import logging
from dataclasses import dataclass, field

import numpy as np

from .classify import evaluate_classifier
from .cover import LabeledDataset, make_problem
from .dissim import as_feature_table, check_dissimilarity, cross_dissimilarity, rank_transform
from .errors import InputError, StateError
from .greedy import solve_greedy
from .lpround import solve_lp_rounding

log = logging.getLogger(__name__)

SOLVERS = ("greedy", "lp_rounding")


def solve(problem, solver="greedy", seed=0):
    if solver == "greedy":
        return solve_greedy(problem)
    if solver == "lp_rounding":
        return solve_lp_rounding(problem, seed=seed)
    raise InputError(f"unknown solver {solver!r}; expected one of {SOLVERS}")


def _stream(seed, *keys):
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, keys)]))


# -- folds -------------------------------------------------------------------

def make_folds(labels, k, seed=0):
    """Stratified partition of ``range(n)`` into ``k`` folds.

    Each class is shuffled and dealt round-robin; the dealing position
    carries over between classes so fold sizes differ by at most one.
    """
    y = labels.labels if isinstance(labels, LabeledDataset) else np.asarray(labels).ravel()
    n = y.size
    if k < 2:
        raise InputError(f"need at least 2 folds, got {k}")
    if k > n:
        raise InputError(f"cannot make {k} folds from {n} points")
    rng = _stream(seed, 0xF01D)
    buckets = [[] for _ in range(k)]
    offset = 0
    for c in np.unique(y):
        idx = rng.permutation(np.flatnonzero(y == c))
        for r, i in enumerate(idx):
            buckets[(offset + r) % k].append(int(i))
        offset = (offset + idx.size) % k
    return [np.sort(np.asarray(b, dtype=np.intp)) for b in buckets]


# -- k-means -------------------------------------------------------------------

@dataclass
class KMeansResult:
    centroids: np.ndarray
    assignment: np.ndarray
    inertia_history: list = field(default_factory=list)
    iterations: int = 0


def _sq_dist(x, c):
    return ((x[:, None, :] - c[None, :, :]) ** 2).sum(axis=2)


def lloyd_kmeans(x, k, seed=0, max_iter=100):
    """Lloyd's algorithm from ``k`` distinct data points drawn under ``seed``.

    An empty cluster takes over the point currently farthest from its
    centroid. ``inertia_history`` holds the within-cluster sum of squares
    after every centroid update.
    """
    x = as_feature_table(x)
    n = x.shape[0]
    if k < 1:
        raise InputError("k must be at least 1")
    if n <= k:
        return KMeansResult(centroids=x.copy(), assignment=np.arange(n), iterations=0,
                            inertia_history=[0.0])
    rng = _stream(seed, 0x4D45)
    # distinct by value, not just by index, so no two seeds coincide
    uniq = np.unique(x, axis=0, return_index=True)[1]
    pool = np.sort(uniq) if uniq.size >= k else np.arange(n)
    centroids = x[rng.choice(pool, size=k, replace=False)].copy()
    assignment = np.full(n, -1)
    history = []
    it = 0
    for it in range(1, max_iter + 1):
        dist = _sq_dist(x, centroids)
        new = np.argmin(dist, axis=1)
        for c in range(k):
            if not np.any(new == c):
                own = dist[np.arange(n), new]
                # only steal from clusters that keep at least one point
                sizes = np.bincount(new, minlength=k)
                own = np.where(sizes[new] > 1, own, -1.0)
                far = int(np.argmax(own))
                new[far] = c
                centroids[c] = x[far]
        changed = not np.array_equal(new, assignment)
        assignment = new
        for c in range(k):
            centroids[c] = x[assignment == c].mean(axis=0)
        history.append(float(((x - centroids[assignment]) ** 2).sum()))
        if not changed:
            break
    return KMeansResult(centroids=centroids, assignment=assignment,
                        inertia_history=history, iterations=it)


@dataclass(frozen=True)
class AugmentedCandidates:
    features: np.ndarray     # training rows first, then centroids
    synthetic: np.ndarray    # True for centroid rows
    centroid_class: np.ndarray  # class index for centroid rows, -1 for data rows


def augment_candidates_kmeans(features, labels, k, seed=0, max_iter=100):
    """Candidate table ``X`` followed by ``k`` centroids per class (fewer for tiny classes)."""
    if features is None:
        raise StateError("k-means augmentation needs feature vectors, not a precomputed matrix")
    x = as_feature_table(features)
    data = labels if isinstance(labels, LabeledDataset) else LabeledDataset.from_labels(labels)
    if data.n != x.shape[0]:
        raise InputError(f"{x.shape[0]} feature rows but {data.n} labels")
    if k < 1:
        raise InputError("k must be at least 1")
    blocks, owners = [x], [np.full(x.shape[0], -1)]
    for l in range(data.n_classes):
        rows = data.class_index(l)
        if rows.size == 0:
            continue
        km = lloyd_kmeans(x[rows], k, seed=int(seed) * 1009 + l, max_iter=max_iter)
        blocks.append(km.centroids)
        owners.append(np.full(km.centroids.shape[0], l))
    owner = np.concatenate(owners)
    return AugmentedCandidates(features=np.vstack(blocks), synthetic=owner >= 0,
                               centroid_class=owner)


# -- cross-validation ----------------------------------------------------------

@dataclass
class CvReport:
    grid: list
    mean_error: list
    se: list
    mean_prototypes: list
    folds: int
    chosen_epsilon: float
    fold_errors: list = field(default_factory=list)      # [eps][fold]
    fold_prototypes: list = field(default_factory=list)  # [eps][fold]
    fold_sets: list = None                               # [eps][fold] -> per-class lists

    def rows(self):
        return zip(self.grid, self.mean_error, self.se, self.mean_prototypes)

    def to_csv(self):
        lines = ["epsilon,mean_error,se,mean_prototypes"]
        lines += [",".join(repr(float(v)) for v in row) for row in self.rows()]
        return "\n".join(lines) + "\n"

    def to_json(self):
        doc = {
            "grid": [float(e) for e in self.grid],
            "mean_error": [float(e) for e in self.mean_error],
            "se": [float(e) for e in self.se],
            "mean_prototypes": [float(e) for e in self.mean_prototypes],
            "folds": self.folds,
            "chosen_epsilon": float(self.chosen_epsilon),
            "fold_errors": [[float(v) for v in r] for r in self.fold_errors],
            "fold_prototypes": [[int(v) for v in r] for r in self.fold_prototypes],
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def one_se_rule(grid, mean_error=None, se=None):
    """Largest radius whose mean CV error is within one SE of the best.

    Accepts a :class:`CvReport` or three parallel sequences. Among several
    minimizers the smallest radius supplies the SE, so the answer does not
    depend on the order of the grid.
    """
    if isinstance(grid, CvReport):
        grid, mean_error, se = grid.grid, grid.mean_error, grid.se
    eps = np.asarray(grid, dtype=np.float64)
    err = np.asarray(mean_error, dtype=np.float64)
    s = np.asarray(se, dtype=np.float64)
    order = np.lexsort((eps, err))
    best = order[0]
    threshold = err[best] + s[best]
    ok = err <= threshold + 1e-12
    return float(eps[ok].max())


def _fold_dissims(train, d, features, metric, kmeans_k, rank, dataset, seed, fold):
    """All-points-by-candidates matrix for one fold, built from training rows only."""
    provenance = None
    if kmeans_k:
        aug = augment_candidates_kmeans(features[train], dataset.subset(train), kmeans_k,
                                        seed=_stream(seed, 0xA06, fold).integers(2**31))
        dz = cross_dissimilarity(features, aug.features, metric)
        provenance = aug
    elif d is not None:
        dz = d[:, train]
    else:
        dz = cross_dissimilarity(features, features[train], metric)
    if rank:
        dz = rank_transform(dz, training_rows=train)
    return dz, provenance


def cross_validate(labels, d=None, grid=None, folds=10, lam=None, solver="greedy", seed=0,
                   features=None, metric="l2", kmeans_k=None, rank=False, keep_sets=False):
    """K-fold CV error of nearest-prototype classification over ``grid``.

    ``d`` is the square dissimilarity over all points (ignored when
    ``kmeans_k`` is set, which requires ``features``). Every fold rebuilds
    candidates, rank transform, centroids and incidence from its training
    rows alone. ``lam=None`` means ``1/n_train`` per fold.
    """
    dataset = labels if isinstance(labels, LabeledDataset) else LabeledDataset.from_labels(labels)
    if d is None and features is None:
        raise InputError("cross_validate needs a dissimilarity matrix or features")
    if kmeans_k and features is None:
        raise StateError("k-means augmentation needs feature vectors")
    if d is not None:
        d = check_dissimilarity(d)
        if d.shape != (dataset.n, dataset.n):
            raise InputError(f"dissimilarity must be {dataset.n}x{dataset.n}, got {d.shape}")
    if features is not None:
        features = as_feature_table(features)
    if grid is None or len(grid) == 0:
        raise InputError("epsilon grid is empty")
    grid = [float(e) for e in grid]
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise InputError("epsilon grid must be ascending")

    fold_idx = make_folds(dataset, folds, seed=seed)
    errors = np.zeros((len(grid), folds))
    counts = np.zeros((len(grid), folds), dtype=np.int64)
    sets_kept = [[None] * folds for _ in grid] if keep_sets else None
    all_rows = np.arange(dataset.n)
    for f, test in enumerate(fold_idx):
        train = np.setdiff1d(all_rows, test)
        train_data = dataset.subset(train)
        missing = set(range(dataset.n_classes)) - set(train_data.labels.tolist())
        if missing:
            raise InputError(f"fold {f} training part lacks classes {sorted(missing)}")
        dz, _ = _fold_dissims(train, d, features, metric, kmeans_k, rank, dataset, seed, f)
        d_train, d_test = dz[train], dz[test]
        for e, eps in enumerate(grid):
            problem = make_problem(train_data, d_train, eps, lam)
            sol = solve(problem, solver, seed=_stream(seed, 0x5E1, e, f).integers(2**31))
            counts[e, f] = sol.n_prototypes
            if keep_sets:
                sets_kept[e][f] = sol.sets
            if sol.n_prototypes == 0:
                errors[e, f] = _empty_model_error(train_data, dataset.labels[test])
            else:
                rep = evaluate_classifier(sol, d_test, dataset.labels[test], dataset.n_classes)
                errors[e, f] = rep.error
        log.debug("fold %d done", f)

    mean = errors.mean(axis=1)
    se = errors.std(axis=1, ddof=1) / np.sqrt(folds)
    report = CvReport(grid=grid, mean_error=mean.tolist(), se=se.tolist(),
                      mean_prototypes=counts.mean(axis=1).tolist(), folds=folds,
                      chosen_epsilon=float("nan"), fold_errors=errors.tolist(),
                      fold_prototypes=counts.tolist(), fold_sets=sets_kept)
    report.chosen_epsilon = one_se_rule(report)
    return report


def _empty_model_error(train_data, test_labels):
    # no prototypes at all: fall back to the majority training class
    majority = np.bincount(train_data.labels, minlength=train_data.n_classes).argmax()
    return float(np.mean(np.asarray(test_labels) != majority)) if len(test_labels) else 0.0
