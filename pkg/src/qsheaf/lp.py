"""Dense two-phase simplex for small linear programs.

Solves ``min c.x  subject to  A x = b, x >= 0`` with Bland's
smallest-index pivoting rule, which cannot cycle.  Problem sizes here are
bounded by polytope-vertex enumeration, so a dense float tableau is
deterministic, dependency-free and fast enough.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleError, LPError, UnboundedError

PIVOT_ATOL = 1e-9


@dataclass(eq=False)
class LPResult:
    x: np.ndarray
    value: float
    iterations: int


def _pivot(tableau: np.ndarray, basis: np.ndarray, row: int, col: int) -> None:
    tableau[row] /= tableau[row, col]
    for r in range(tableau.shape[0]):
        if r != row and abs(tableau[r, col]) > 0.0:
            tableau[r] -= tableau[r, col] * tableau[row]
    basis[row] = col


def _run_simplex(
    tableau: np.ndarray,
    basis: np.ndarray,
    cost: np.ndarray,
    n_cols: int,
    max_iter: int,
) -> int:
    """Optimize in place; the last tableau row holds reduced costs and -objective."""
    m = tableau.shape[0] - 1
    # rebuild the reduced-cost row from the current basis
    tableau[m, :] = 0.0
    tableau[m, :n_cols] = cost
    for r in range(m):
        if abs(cost[basis[r]]) > 0.0:
            tableau[m] -= cost[basis[r]] * tableau[r]
    iterations = 0
    while True:
        reduced = tableau[m, :n_cols]
        entering = -1
        for j in range(n_cols):
            if reduced[j] < -PIVOT_ATOL:
                entering = j
                break
        if entering < 0:
            return iterations
        leaving, best_ratio = -1, np.inf
        for r in range(m):
            a = tableau[r, entering]
            if a > PIVOT_ATOL:
                ratio = tableau[r, -1] / a
                if ratio < best_ratio - PIVOT_ATOL or (
                    abs(ratio - best_ratio) <= PIVOT_ATOL
                    and (leaving < 0 or basis[r] < basis[leaving])
                ):
                    best_ratio, leaving = ratio, r
        if leaving < 0:
            raise UnboundedError("objective is unbounded below")
        _pivot(tableau, basis, leaving, entering)
        iterations += 1
        if iterations > max_iter:
            raise LPError(f"simplex did not converge within {max_iter} pivots")


def solve_lp(c, a_eq, b_eq, max_iter: int = 100000) -> LPResult:
    """Minimize ``c.x`` over ``a_eq x = b_eq, x >= 0``.

    Raises ``InfeasibleError`` or ``UnboundedError``; otherwise returns an
    optimal basic solution.
    """
    a = np.asarray(a_eq, dtype=float).copy()
    b = np.asarray(b_eq, dtype=float).copy().reshape(-1)
    c = np.asarray(c, dtype=float).reshape(-1)
    m, n = a.shape
    if b.size != m or c.size != n:
        raise LPError(f"inconsistent LP shapes: A {a.shape}, b {b.size}, c {c.size}")
    flip = b < 0
    a[flip] *= -1.0
    b[flip] *= -1.0

    # phase 1: artificial basis, minimize the artificial sum
    n_total = n + m
    tableau = np.zeros((m + 1, n_total + 1))
    tableau[:m, :n] = a
    tableau[:m, n:n_total] = np.eye(m)
    tableau[:m, -1] = b
    basis = np.arange(n, n_total)
    phase1_cost = np.concatenate([np.zeros(n), np.ones(m)])
    iters = _run_simplex(tableau, basis, phase1_cost, n_total, max_iter)
    if tableau[m, -1] < -PIVOT_ATOL * max(1.0, float(np.abs(b).max(initial=0.0))):
        raise InfeasibleError(f"phase-1 objective {-tableau[m, -1]:.3e} is positive")

    # drive leftover artificials out of the basis, dropping redundant rows
    keep_rows = []
    for r in range(m):
        if basis[r] >= n:
            pivot_col = -1
            for j in range(n):
                if abs(tableau[r, j]) > PIVOT_ATOL:
                    pivot_col = j
                    break
            if pivot_col < 0:
                continue  # redundant constraint row
            _pivot(tableau, basis, r, pivot_col)
        keep_rows.append(r)
    if len(keep_rows) < m:
        rows = keep_rows + [m]
        tableau = tableau[rows, :]
        basis = basis[keep_rows]
        m = len(keep_rows)

    # phase 2 on original columns only
    tableau = np.delete(tableau, np.s_[n:n_total], axis=1)
    iters += _run_simplex(tableau, basis, c, n, max_iter)
    x = np.zeros(n)
    for r in range(m):
        x[basis[r]] = tableau[r, -1]
    return LPResult(x=x, value=float(c @ x), iterations=iters)
