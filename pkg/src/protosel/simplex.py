"""Dense two-phase tableau simplex with Bland's anti-cycling rule.

Solves ``min c @ x  s.t.  A @ x >= b,  low <= x <= high`` where ``low`` is
finite and ``high`` may be ``inf``. Meant for the small, dense covering
LPs produced per class; no sparsity tricks.
"""

import numpy as np

from .errors import InputError, SolverError

PIVOT_TOL = 1e-9
OBJECTIVE_TOL = 1e-7


def _pivot(T, basis, row, col):
    T[row] /= T[row, col]
    pcol = T[:, col].copy()
    pcol[row] = 0.0
    T -= np.outer(pcol, T[row])
    T[np.abs(T) < 1e-13] = 0.0
    basis[row] = col


def _run(T, basis, cost, allowed, max_iter, phase, iterations):
    """Bland-rule primal simplex on tableau ``T`` (last column = rhs)."""
    while True:
        if iterations >= max_iter:
            raise SolverError(
                f"simplex iteration cap ({max_iter}) reached in phase {phase}",
                phase=phase, iterations=iterations,
                objective=float(cost[basis] @ T[:, -1]))
        reduced = cost - cost[basis] @ T[:, :-1]
        entering = np.flatnonzero((reduced < -PIVOT_TOL) & allowed)
        if entering.size == 0:
            return iterations
        col = entering[0]
        column = T[:, col]
        rows = np.flatnonzero(column > PIVOT_TOL)
        if rows.size == 0:
            raise SolverError("linear program is unbounded", phase=phase,
                              iterations=iterations, column=int(col))
        ratios = T[rows, -1] / column[rows]
        best = ratios.min()
        ties = rows[ratios <= best + 1e-12 * max(1.0, abs(best))]
        row = ties[np.argmin(np.asarray(basis)[ties])]
        _pivot(T, basis, row, col)
        np.maximum(T[:, -1], 0.0, out=T[:, -1], where=T[:, -1] > -PIVOT_TOL)
        iterations += 1


def simplex_solve(c, A, b, low, high, max_iter=None):
    """Return ``(x, value, iterations)`` for the bounded covering LP."""
    c = np.asarray(c, dtype=np.float64)
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    b = np.asarray(b, dtype=np.float64)
    low = np.asarray(low, dtype=np.float64)
    high = np.asarray(high, dtype=np.float64)
    nvar = c.size
    if A.size == 0:
        A = A.reshape(0, nvar)
    nrow = A.shape[0]
    if A.shape[1] != nvar or b.size != nrow or low.size != nvar or high.size != nvar:
        raise InputError("inconsistent linear program dimensions")
    for name, arr in (("c", c), ("A", A), ("b", b), ("low", low)):
        if not np.all(np.isfinite(arr)):
            raise InputError(f"linear program field {name} has non-finite entries")
    if np.any(np.isnan(high)) or np.any(high < low):
        raise InputError("linear program has empty variable bounds")

    # shift so every variable has lower bound 0
    rhs = b - A @ low
    upper_idx = np.flatnonzero(np.isfinite(high))
    ub = high[upper_idx] - low[upper_idx]
    nup = upper_idx.size

    # columns: y (nvar) | surplus (nrow) | upper slack (nup) | artificials
    n_struct = nvar + nrow + nup
    need_art = rhs > 0
    art_rows = np.flatnonzero(need_art)
    ncol = n_struct + art_rows.size
    T = np.zeros((nrow + nup, ncol + 1))
    basis = [0] * (nrow + nup)

    for i in range(nrow):
        if need_art[i]:
            T[i, :nvar] = A[i]
            T[i, nvar + i] = -1.0
            T[i, -1] = rhs[i]
        else:
            T[i, :nvar] = -A[i]
            T[i, nvar + i] = 1.0
            T[i, -1] = -rhs[i]
            basis[i] = nvar + i
    for k, a in enumerate(art_rows):
        T[a, n_struct + k] = 1.0
        basis[a] = n_struct + k
    for k, v in enumerate(upper_idx):
        r = nrow + k
        T[r, v] = 1.0
        T[r, nvar + nrow + k] = 1.0
        T[r, -1] = ub[k]
        basis[r] = nvar + nrow + k

    if max_iter is None:
        max_iter = 50 * (T.shape[0] + ncol) + 1000
    iterations = 0

    if art_rows.size:
        cost1 = np.zeros(ncol)
        cost1[n_struct:] = 1.0
        allowed = np.ones(ncol, dtype=bool)
        iterations = _run(T, basis, cost1, allowed, max_iter, 1, iterations)
        infeas = float(cost1[basis] @ T[:, -1])
        if infeas > OBJECTIVE_TOL:
            raise SolverError("linear program is infeasible", phase=1,
                              iterations=iterations, infeasibility=infeas)
        # drive zero-valued artificials out of the basis, dropping redundant rows
        keep = []
        for r in range(T.shape[0]):
            if basis[r] >= n_struct:
                cand = np.flatnonzero(np.abs(T[r, :n_struct]) > PIVOT_TOL)
                if cand.size == 0:
                    continue
                _pivot(T, basis, r, cand[0])
            keep.append(r)
        T = T[keep]
        basis = [basis[r] for r in keep]
        T = np.delete(T, np.s_[n_struct:ncol], axis=1)
        ncol = n_struct

    cost2 = np.zeros(ncol)
    cost2[:nvar] = c
    iterations = _run(T, basis, cost2, np.ones(ncol, dtype=bool), max_iter, 2, iterations)

    y = np.zeros(ncol)
    y[basis] = T[:, -1]
    x = low + y[:nvar]
    x = np.clip(x, low, high)
    return x, float(c @ x), iterations
