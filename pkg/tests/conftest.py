import itertools
from fractions import Fraction

import numpy as np
import pytest

from protosel import compute_dissimilarity, cross_dissimilarity, distance_quantiles, make_problem

TOY_X = np.array([0.0, 1.0, 2.0, 10.0, 11.0])
TOY_LABELS = [1, 1, 1, 2, 2]


@pytest.fixture
def toy():
    d = np.abs(TOY_X[:, None] - TOY_X[None, :])
    return make_problem(TOY_LABELS, d, 1.5, 0.2)


def random_instance(rng, n_max=30, L_max=4, m_max=30, lam=None, on_points=None):
    """Random labeled points in the plane plus a candidate set and radius.

    Candidates are either the points themselves or fresh random points.
    Returns ``(problem, exact_lambda)``.
    """
    L = int(rng.integers(1, L_max + 1))
    n = int(rng.integers(max(L, 2), n_max + 1))
    labels = np.concatenate([np.arange(L), rng.integers(0, L, n - L)])
    rng.shuffle(labels)
    x = rng.normal(size=(n, 2)) * 2 + labels[:, None] * rng.uniform(0, 2)
    if on_points is None:
        on_points = rng.random() < 0.5
    if on_points and n <= m_max:
        z = x
    else:
        z = rng.normal(size=(int(rng.integers(0, m_max + 1)), 2)) * 2
    d = cross_dissimilarity(x, z) if len(z) else np.zeros((n, 0))
    pool = compute_dissimilarity(x)
    eps = distance_quantiles(pool, [rng.uniform(0, 0.8)])[0]
    if lam is None:
        lam = [Fraction(0), Fraction(1, n), Fraction(1, 2)][int(rng.integers(3))]
    return make_problem(labels, d, eps, float(lam)), lam


def brute_slacks(d, labels, eps, sets):
    """Slacks straight from the definitions, by loops over raw dissimilarities."""
    n = len(labels)
    xi = [1] * n
    eta = [0] * n
    for i in range(n):
        for l, s in enumerate(sets):
            for j in set(s):
                if d[i][j] < eps:
                    if l == labels[i]:
                        xi[i] = 0
                    else:
                        eta[i] += 1
    return xi, eta


def brute_objective(problem, sets, lam=None):
    lam = Fraction(problem.lam) if lam is None else Fraction(lam)
    d = np.where(problem.incidence.member, 0.0, 2.0)
    xi, eta = brute_slacks(d, problem.dataset.labels.tolist(), 1.0, sets)
    return sum(xi) + sum(eta) + lam * sum(len(set(s)) for s in sets)


def brute_optimum(problem, lam=None):
    """Joint optimum over all per-class subsets (product enumeration, tiny only)."""
    m, L = problem.m, problem.n_classes
    subsets = [c for r in range(m + 1) for c in itertools.combinations(range(m), r)]
    best = None
    for combo in itertools.product(subsets, repeat=L):
        v = brute_objective(problem, [list(s) for s in combo], lam)
        if best is None or v < best:
            best = v
    return best


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
