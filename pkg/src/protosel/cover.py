"""Ball incidence, the per-class prize-collecting set cover decomposition,
and exact evaluation of a prototype selection.

A selection assigns each class ``l`` an ordered list of candidate indices.
Its cost is

    (#points not covered by a ball of their own class)
  + (#(point, wrong-class prototype) pairs with the point inside the ball)
  + lam * (#prototypes)

which splits into independent per-class problems where candidate ``j``
costs ``lam + |ball(j) minus class l|`` for class ``l`` and every class-``l``
point left uncovered costs 1.
"""

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .dissim import check_dissimilarity
from .errors import InputError


@dataclass(frozen=True)
class LabeledDataset:
    """Class labels recoded as integers ``0..L-1``.

    ``classes[k]`` is the original label of class index ``k``; classes are
    ordered by sorted original label, so "lowest class id" tie-breaking
    means lowest original label.
    """

    labels: np.ndarray
    classes: tuple

    @classmethod
    def from_labels(cls, raw_labels):
        raw = list(np.asarray(raw_labels).ravel().tolist())
        if not raw:
            raise InputError("dataset has no labels")
        classes = tuple(sorted(set(raw)))
        lookup = {c: k for k, c in enumerate(classes)}
        labels = np.array([lookup[v] for v in raw], dtype=np.intp)
        labels.setflags(write=False)
        return cls(labels=labels, classes=classes)

    @property
    def n(self):
        return len(self.labels)

    @property
    def n_classes(self):
        return len(self.classes)

    def class_index(self, l):
        return np.flatnonzero(self.labels == l)

    def subset(self, rows):
        """Dataset restricted to ``rows``, keeping the full class list."""
        labels = self.labels[np.asarray(rows, dtype=np.intp)].copy()
        labels.setflags(write=False)
        return LabeledDataset(labels=labels, classes=self.classes)


@dataclass(frozen=True)
class BallIncidence:
    """Which points fall strictly inside which candidate's ball.

    ``member[i, j]`` is True iff ``d[i, j] < epsilon``; ``covers[j]`` and
    ``covered_by[i]`` are the sorted index lists read off that matrix.
    """

    member: np.ndarray
    epsilon: float
    covers: tuple = field(repr=False)
    covered_by: tuple = field(repr=False)

    @property
    def n_points(self):
        return self.member.shape[0]

    @property
    def n_candidates(self):
        return self.member.shape[1]


def build_incidence(d, epsilon):
    d = check_dissimilarity(d)
    epsilon = float(epsilon)
    if not epsilon > 0:
        raise InputError(f"epsilon must be positive, got {epsilon}")
    member = d < epsilon
    member.setflags(write=False)
    covers = tuple(np.flatnonzero(member[:, j]) for j in range(member.shape[1]))
    covered_by = tuple(np.flatnonzero(member[i]) for i in range(member.shape[0]))
    return BallIncidence(member=member, epsilon=epsilon, covers=covers, covered_by=covered_by)


@dataclass(frozen=True)
class PrototypeProblem:
    dataset: LabeledDataset
    incidence: BallIncidence
    lam: float

    def __post_init__(self):
        if self.incidence.n_points != self.dataset.n:
            raise InputError(
                f"incidence has {self.incidence.n_points} points but dataset has {self.dataset.n}")
        if not self.lam >= 0:
            raise InputError(f"lambda must be nonnegative, got {self.lam}")

    @property
    def n(self):
        return self.dataset.n

    @property
    def m(self):
        return self.incidence.n_candidates

    @property
    def n_classes(self):
        return self.dataset.n_classes

    def wrong_counts(self):
        """``(L, m)`` integer matrix: points of other classes inside each ball."""
        member = self.incidence.member.astype(np.int64)
        total = member.sum(axis=0)
        own = np.stack([member[self.dataset.labels == l].sum(axis=0)
                        for l in range(self.n_classes)])
        return total[None, :] - own


def make_problem(labels, d, epsilon, lam=None):
    """Convenience constructor; ``lam=None`` means ``1/n``."""
    dataset = labels if isinstance(labels, LabeledDataset) else LabeledDataset.from_labels(labels)
    incidence = build_incidence(d, epsilon)
    if lam is None:
        lam = 1.0 / dataset.n
    return PrototypeProblem(dataset=dataset, incidence=incidence, lam=lam)


@dataclass(frozen=True)
class PcscSubproblem:
    class_id: int
    target_points: np.ndarray
    costs: np.ndarray
    covers_in_class: tuple = field(repr=False)
    lam: float = 0.0

    @property
    def m(self):
        return len(self.costs)


def decompose(problem):
    """Split the joint problem into one prize-collecting set cover per class."""
    labels = problem.dataset.labels
    wrong = problem.wrong_counts()
    subs = []
    for l in range(problem.n_classes):
        in_class = labels == l
        covers_in_class = tuple(c[in_class[c]] for c in problem.incidence.covers)
        subs.append(PcscSubproblem(
            class_id=l,
            target_points=np.flatnonzero(in_class),
            costs=problem.lam + wrong[l].astype(np.float64),
            covers_in_class=covers_in_class,
            lam=problem.lam,
        ))
    return subs


@dataclass
class PrototypeSolution:
    """Per-class prototype lists (selection order kept) with slack accounting.

    ``xi[i]`` is 1 when no prototype of point ``i``'s own class covers it;
    ``eta[i]`` counts wrong-class prototypes whose balls contain it.
    """

    sets: list
    xi: np.ndarray
    eta: np.ndarray
    objective: float
    per_class_objective: list
    trace: list = None
    extras: dict = field(default_factory=dict)

    @property
    def counts(self):
        return [len(s) for s in self.sets]

    @property
    def n_prototypes(self):
        return sum(self.counts)


def _normalize_sets(problem, sets):
    if len(sets) != problem.n_classes:
        raise InputError(f"expected {problem.n_classes} prototype sets, got {len(sets)}")
    out = []
    for l, s in enumerate(sets):
        seen = []
        for j in s:
            j = int(j)
            if not 0 <= j < problem.m:
                raise InputError(f"candidate index {j} for class {l} out of range [0, {problem.m})")
            if j not in seen:
                seen.append(j)
        out.append(seen)
    return out


def _slacks(problem, sets):
    member = problem.incidence.member
    labels = problem.dataset.labels
    n, L = problem.n, problem.n_classes
    # hits[i, l]: number of class-l prototypes whose ball contains point i
    hits = np.zeros((n, L), dtype=np.int64)
    for l, s in enumerate(sets):
        if s:
            hits[:, l] = member[:, s].sum(axis=1)
    own = hits[np.arange(n), labels]
    xi = (own == 0).astype(np.int64)
    eta = hits.sum(axis=1) - own
    return xi, eta


def evaluate_solution(problem, sets, trace=None):
    """Score a selection. Duplicate indices within a class are dropped."""
    sets = _normalize_sets(problem, sets)
    xi, eta = _slacks(problem, sets)
    wrong = problem.wrong_counts()
    labels = problem.dataset.labels
    count = sum(len(s) for s in sets)
    objective = float(xi.sum() + eta.sum()) + problem.lam * count
    per_class = []
    for l, s in enumerate(sets):
        integer_part = int(xi[labels == l].sum()) + int(wrong[l, s].sum())
        per_class.append(float(integer_part) + problem.lam * len(s))
    return PrototypeSolution(sets=sets, xi=xi, eta=eta, objective=objective,
                             per_class_objective=per_class, trace=trace)


def exact_objectives(problem, sets, lam=None):
    """Joint objective and per-class objectives as exact fractions.

    ``lam`` overrides the problem's lambda, e.g. with ``Fraction(1, n)``
    when the float stored on the problem is only an approximation.
    """
    sets = _normalize_sets(problem, sets)
    lam = Fraction(problem.lam if lam is None else lam)
    xi, eta = _slacks(problem, sets)
    wrong = problem.wrong_counts()
    labels = problem.dataset.labels
    joint = int(xi.sum()) + int(eta.sum()) + lam * sum(len(s) for s in sets)
    per_class = [int(xi[labels == l].sum()) + int(wrong[l, s].sum()) + lam * len(s)
                 for l, s in enumerate(sets)]
    return joint, per_class


def decomposition_identity(problem, sets, lam=None):
    """True iff the joint objective equals the sum of per-class objectives.

    Checked in rational arithmetic, so the answer is exact for any float or
    ``Fraction`` lambda.
    """
    joint, per_class = exact_objectives(problem, sets, lam)
    return joint == sum(per_class, Fraction(0))
