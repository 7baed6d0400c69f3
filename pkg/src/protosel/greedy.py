"""Greedy prototype selection.

Each step adds the (candidate, class) pair with the largest improvement

    delta_obj = newly covered same-class points - wrong-class points in ball - lam

and stops as soon as no pair has a strictly positive improvement. Ties go
to the lowest class, then the lowest candidate index.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .cover import evaluate_solution


@dataclass(frozen=True)
class GreedyStep:
    candidate: int
    class_id: int
    delta_xi: int
    delta_eta: int
    delta_obj: float
    cumulative_objective: float = float("nan")


def delta_objective(problem, current_sets, candidate, class_id):
    """Improvement from adding ``candidate`` to class ``class_id``'s prototypes."""
    member = problem.incidence.member
    in_class = problem.dataset.labels == class_id
    ball = member[:, candidate]
    covered = np.zeros(problem.n, dtype=bool)
    chosen = list(current_sets[class_id])
    if chosen:
        covered = member[:, chosen].any(axis=1)
    delta_xi = int(np.count_nonzero(ball & in_class & ~covered))
    delta_eta = int(np.count_nonzero(ball & ~in_class))
    return GreedyStep(candidate=int(candidate), class_id=int(class_id), delta_xi=delta_xi,
                      delta_eta=delta_eta, delta_obj=delta_xi - delta_eta - problem.lam)


def solve_greedy(problem, max_steps=None):
    member = problem.incidence.member
    labels = problem.dataset.labels
    L, n, lam = problem.n_classes, problem.n, problem.lam
    member_i = member.astype(np.int64)

    wrong = problem.wrong_counts()
    uncovered = [labels == l for l in range(L)]
    # gain[l, j]: still-uncovered class-l points inside ball j
    gain = np.stack([member_i[u].sum(axis=0) for u in uncovered]) if L else np.zeros((0, 0))
    net = gain - wrong

    sets = [[] for _ in range(L)]
    trace = []
    integer_part = n  # uncovered points + wrong coverings, starts with everything uncovered
    while problem.m and (max_steps is None or len(trace) < max_steps):
        flat = int(np.argmax(net))
        l, j = divmod(flat, problem.m)
        best = net[l, j] - lam
        if not best > 0:
            break
        newly = uncovered[l] & member[:, j]
        d_xi = int(np.count_nonzero(newly))
        d_eta = int(wrong[l, j])
        uncovered[l] = uncovered[l] & ~newly
        dec = member_i[newly].sum(axis=0)
        gain[l] -= dec
        net[l] -= dec
        sets[l].append(int(j))
        integer_part -= d_xi - d_eta
        trace.append(GreedyStep(
            candidate=int(j), class_id=int(l), delta_xi=d_xi, delta_eta=d_eta,
            delta_obj=d_xi - d_eta - lam,
            # same expression evaluate_solution uses, so the floats agree bit for bit
            cumulative_objective=float(integer_part) + lam * (len(trace) + 1),
        ))
    return evaluate_solution(problem, sets, trace=trace)


TRACE_FIELDS = ("step", "class", "candidate", "delta_xi", "delta_eta", "delta_obj",
                "cumulative_objective")


def trace_rows(trace, classes=None):
    for k, s in enumerate(trace, start=1):
        cls = classes[s.class_id] if classes is not None else s.class_id
        yield (k, cls, s.candidate, s.delta_xi, s.delta_eta, repr(float(s.delta_obj)),
               repr(float(s.cumulative_objective)))


def write_trace_csv(fh, trace, classes=None):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(TRACE_FIELDS)
    w.writerows(trace_rows(trace, classes))
