"""Brute-force optimum for tiny instances, used as ground truth in tests.

Classes are solved independently (the objective separates by class), each
by enumerating every subset of candidates, so the work is ``L * 2**m``.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .cover import decompose, evaluate_solution
from .errors import InputError

DEFAULT_MAX_CANDIDATES = 16


@dataclass(frozen=True)
class OracleResult:
    optimal_objective: float
    optimal_sets: list
    enumerated: int
    per_class_optima: list
    exact_objective: Fraction


def _subset_tables(masks, costs_int, m):
    """Coverage bitmask, summed wrong-count and size for all ``2**m`` subsets."""
    size = 1 << m
    cov = np.zeros(size, dtype=np.int64)
    wrong = np.zeros(size, dtype=np.int64)
    card = np.zeros(size, dtype=np.int64)
    for j in range(m):
        half = 1 << j
        cov[half:2 * half] = cov[:half] | masks[j]
        wrong[half:2 * half] = wrong[:half] + costs_int[j]
        card[half:2 * half] = card[:half] + 1
    return cov, wrong, card


def _lex_key(mask):
    return [j for j in range(mask.bit_length()) if mask >> j & 1]


def solve_class(sub, lam):
    """Exact optimum of one class subproblem: ``(exact value, sorted candidate list)``."""
    m = sub.m
    t = len(sub.target_points)
    if t > 62:
        raise InputError("oracle supports at most 62 points per class")
    pos = {int(p): k for k, p in enumerate(sub.target_points)}
    masks = [sum(1 << pos[int(p)] for p in pts) for pts in sub.covers_in_class]
    wrong_int = np.rint(np.asarray(sub.costs) - sub.lam).astype(np.int64)
    cov, wrong, card = _subset_tables(masks, wrong_int, m)
    uncovered = t - np.bitwise_count(cov).astype(np.int64)
    integer_part = wrong + uncovered
    # distinct (integer part, size) pairs carry distinct exact values
    pairs = np.unique(np.stack([integer_part, card], axis=1), axis=0)
    values = [int(a) + lam * int(k) for a, k in pairs]
    best = min(values)
    winners = [tuple(p) for p, v in zip(pairs.tolist(), values) if v == best]
    hit = np.zeros(cov.size, dtype=bool)
    for a, k in winners:
        hit |= (integer_part == a) & (card == k)
    best_set = min((_lex_key(int(s)) for s in np.flatnonzero(hit)))
    return best, best_set, cov.size


def solve_exact(problem, max_candidates=DEFAULT_MAX_CANDIDATES, lam=None):
    """Exact joint optimum; ties resolved to the lexicographically smallest sets."""
    if problem.m > max_candidates:
        raise InputError(
            f"oracle enumeration limited to {max_candidates} candidates, got {problem.m}")
    lam = Fraction(problem.lam if lam is None else lam)
    sets, optima, enumerated = [], [], 0
    for sub in decompose(problem):
        value, best_set, count = solve_class(sub, lam)
        sets.append(best_set)
        optima.append(value)
        enumerated += count
    exact = sum(optima, Fraction(0))
    joint = evaluate_solution(problem, sets)
    return OracleResult(optimal_objective=joint.objective, optimal_sets=sets,
                        enumerated=enumerated, per_class_optima=optima, exact_objective=exact)
