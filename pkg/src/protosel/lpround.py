"""LP relaxation of each class's prize-collecting set cover, followed by
randomized rounding.

For class ``l`` the relaxation is

    min  sum_j cost_j * a_j + sum_i s_i
    s.t. sum_{j : i in ball(j)} a_j + s_i >= 1   for each class-l point i
         0 <= a_j, s_i <= 1

Rounding draws each variable as a Bernoulli with the LP value as success
probability, ``max(1, ceil(2 ln N))`` times (``N`` = class size), keeps the
union, and accepts the first accumulated draw that is feasible and whose
cost is within ``2 ln N`` times the LP optimum. Failing that, the whole pass
restarts from a fresh stream.
"""

import math
from dataclasses import dataclass

import numpy as np

from .cover import decompose, evaluate_solution
from .errors import SolverError
from .simplex import simplex_solve

SNAP_TOL = 1e-9
DEFAULT_MAX_ATTEMPTS = 64


@dataclass(frozen=True)
class LinearProgramDense:
    """``min c @ x  s.t.  A @ x >= b,  low <= x <= high``.

    The first ``n_alpha`` variables are candidate indicators, the rest are
    per-point slacks.
    """

    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    low: np.ndarray
    high: np.ndarray
    n_alpha: int

    def dump(self):
        """Plain-text standard form, one section per block, for external solvers."""
        fmt = lambda v: " ".join(repr(float(x)) for x in v)  # noqa: E731
        lines = [f"minimize {fmt(self.c)}", f"rows {self.A.shape[0]} vars {self.c.size}"]
        lines += [f"row {fmt(a)} >= {float(bi)!r}" for a, bi in zip(self.A, self.b)]
        lines += [f"bound {k} {float(lo)!r} {float(hi)!r}"
                  for k, (lo, hi) in enumerate(zip(self.low, self.high))]
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class LpSolution:
    x: np.ndarray
    opt_value: float
    n_alpha: int
    iterations: int = 0

    @property
    def alpha_star(self):
        return self.x[:self.n_alpha]

    @property
    def xi_star(self):
        return self.x[self.n_alpha:]


@dataclass(frozen=True)
class RoundingOutcome:
    selected: list
    abstained: list
    iterations_used: int
    attempts: int
    objective: float
    bound: float


def build_lp(sub):
    m, t = sub.m, len(sub.target_points)
    A = np.zeros((t, m + t))
    pos = {int(p): k for k, p in enumerate(sub.target_points)}
    for j, pts in enumerate(sub.covers_in_class):
        for p in pts:
            A[pos[int(p)], j] = 1.0
    A[:, m:] = np.eye(t)
    c = np.concatenate([np.asarray(sub.costs, dtype=np.float64), np.ones(t)])
    return LinearProgramDense(c=c, A=A, b=np.ones(t), low=np.zeros(m + t),
                              high=np.ones(m + t), n_alpha=m)


def solve_lp(lp, max_iter=None):
    x, _, iterations = simplex_solve(lp.c, lp.A, lp.b, lp.low, lp.high, max_iter=max_iter)
    # snap round-off so the values are exact Bernoulli parameters
    x = np.where(np.abs(x - lp.low) <= SNAP_TOL, lp.low, x)
    x = np.where(np.abs(x - lp.high) <= SNAP_TOL, lp.high, x)
    x = np.clip(x, lp.low, lp.high)
    return LpSolution(x=x, opt_value=float(lp.c @ x), n_alpha=lp.n_alpha, iterations=iterations)


def rounding_rounds(class_size):
    return max(1, math.ceil(2.0 * math.log(class_size))) if class_size > 1 else 1


def approximation_bound(class_size, opt_value):
    """``2 ln N * OPT``, or ``None`` when ``N == 1`` and the bound degenerates to 0."""
    if class_size <= 1:
        return None
    return 2.0 * math.log(class_size) * opt_value


def rounding_rng(seed, class_id, attempt):
    """Counter-based stream keyed by (seed, class, attempt)."""
    ss = np.random.SeedSequence([int(seed), int(class_id), int(attempt)])
    return np.random.Generator(np.random.Philox(ss))


def randomized_round(lps, sub, seed=0, max_attempts=DEFAULT_MAX_ATTEMPTS):
    alpha = lps.alpha_star
    slack = lps.xi_star
    costs = np.asarray(sub.costs, dtype=np.float64)
    t = len(sub.target_points)
    pos = {int(p): k for k, p in enumerate(sub.target_points)}
    # cover_matrix[k, j]: target point k lies in ball j
    cover_matrix = np.zeros((t, sub.m), dtype=bool)
    for j, pts in enumerate(sub.covers_in_class):
        for p in pts:
            cover_matrix[pos[int(p)], j] = True
    rounds = rounding_rounds(t)
    bound = approximation_bound(t, lps.opt_value)
    bound_tol = 1e-9 * max(1.0, abs(bound)) if bound is not None else 0.0

    for attempt in range(max_attempts):
        rng = rounding_rng(seed, sub.class_id, attempt)
        chosen = np.zeros(sub.m, dtype=bool)
        abstain = np.zeros(t, dtype=bool)
        for it in range(1, rounds + 1):
            chosen |= rng.random(sub.m) < alpha
            abstain |= rng.random(t) < slack
            covered = cover_matrix[:, chosen].any(axis=1) if chosen.any() else np.zeros(t, bool)
            if not np.all(covered | abstain):
                continue
            value = float(costs[chosen].sum() + abstain.sum())
            if bound is None or value <= bound + bound_tol:
                return RoundingOutcome(
                    selected=[int(j) for j in np.flatnonzero(chosen)],
                    abstained=[int(sub.target_points[k]) for k in np.flatnonzero(abstain)],
                    iterations_used=it, attempts=attempt + 1, objective=value,
                    bound=float("nan") if bound is None else bound)
    raise SolverError(
        f"randomized rounding for class {sub.class_id} failed after {max_attempts} attempts",
        class_id=sub.class_id, attempts=max_attempts, lp_value=lps.opt_value)


def solve_lp_rounding(problem, seed=0, max_attempts=DEFAULT_MAX_ATTEMPTS):
    sets, lp_values, outcomes = [], [], []
    for sub in decompose(problem):
        try:
            lps = solve_lp(build_lp(sub))
            outcome = randomized_round(lps, sub, seed=seed, max_attempts=max_attempts)
        except SolverError as exc:
            exc.diagnostics.setdefault("class_id", sub.class_id)
            raise SolverError(f"class {sub.class_id}: {exc}", **exc.diagnostics) from exc
        sets.append(outcome.selected)
        lp_values.append(lps.opt_value)
        outcomes.append(outcome)
    sol = evaluate_solution(problem, sets)
    sol.extras["lp_values"] = lp_values
    sol.extras["rounding"] = outcomes
    return sol
