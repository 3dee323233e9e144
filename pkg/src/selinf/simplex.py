"""Phase-I simplex for ``A x = b, x >= 0`` with Bland's anti-cycling rule.

Two arithmetic backends share one pivoting scheme: a dense numpy tableau in
double precision, and a pure-Python tableau over :class:`fractions.Fraction`
that decides feasibility exactly.  Artificial variables start in the basis;
once one leaves it never re-enters.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

PIVOT_TOL = 1e-11


@dataclass
class PhaseOneResult:
    status: str  # "optimal" or "iteration-limit"
    objective: float | Fraction
    x: np.ndarray | list[Fraction]
    iterations: int


def phase_one_float(A: np.ndarray, b: np.ndarray, max_iter: int = 100_000,
                    tol: float = PIVOT_TOL) -> PhaseOneResult:
    """Minimize the sum of artificials for ``A x = b`` with ``b >= 0``."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    if np.any(b < 0):
        neg = b < 0
        A = A.copy()
        b = b.copy()
        A[neg] *= -1
        b[neg] *= -1
    T = np.zeros((m, n + 1))
    T[:, :n] = A
    T[:, n] = b
    basis = np.arange(n, n + m)  # artificial j is column n + row
    cost = -T.sum(axis=0)  # reduced costs for structurals; cost[n] = -objective

    it = 0
    while True:
        cand = np.flatnonzero(cost[:n] < -tol)
        if cand.size == 0:
            status = "optimal"
            break
        if it >= max_iter:
            status = "iteration-limit"
            break
        j = cand[0]
        col = T[:, j]
        rows = np.flatnonzero(col > tol)
        # phase I is bounded below by zero, so some row always qualifies
        ratios = T[rows, n] / col[rows]
        best = ratios.min()
        ties = rows[ratios <= best + tol * max(1.0, abs(best))]
        r = ties[np.argmin(basis[ties])]
        T[r] /= T[r, j]
        f = T[:, j].copy()
        f[r] = 0.0
        T -= np.outer(f, T[r])
        cost -= cost[j] * T[r]
        basis[r] = j
        it += 1

    x = np.zeros(n)
    structural = basis < n
    x[basis[structural]] = T[structural, n]
    objective = float(T[~structural, n].sum())
    return PhaseOneResult(status, objective, x, it)


def phase_one_exact(rows: Sequence[Sequence[int]], n: int, b: Sequence[Fraction],
                    max_iter: int = 100_000) -> PhaseOneResult:
    """Exact phase I.  ``rows[i]`` lists the columns with coefficient 1 in row i."""
    m = len(rows)
    T = [[Fraction(0)] * (n + 1) for _ in range(m)]
    for i, cols in enumerate(rows):
        for j in cols:
            T[i][j] += 1
        T[i][n] = Fraction(b[i])
        if T[i][n] < 0:
            T[i] = [-v for v in T[i]]
    basis = list(range(n, n + m))
    cost = [-sum(T[i][j] for i in range(m)) for j in range(n + 1)]

    it = 0
    while True:
        j = next((k for k in range(n) if cost[k] < 0), None)
        if j is None:
            status = "optimal"
            break
        if it >= max_iter:
            status = "iteration-limit"
            break
        r = None
        best = None
        for i in range(m):
            a = T[i][j]
            if a > 0:
                ratio = T[i][n] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[r]):
                    best, r = ratio, i
        piv = T[r][j]
        prow = [v / piv for v in T[r]]
        T[r] = prow
        nz = [k for k, v in enumerate(prow) if v]
        for i in range(m):
            if i != r and T[i][j]:
                f = T[i][j]
                row = T[i]
                for k in nz:
                    row[k] -= f * prow[k]
        if cost[j]:
            f = cost[j]
            for k in nz:
                cost[k] -= f * prow[k]
        basis[r] = j
        it += 1

    x = [Fraction(0)] * n
    objective = Fraction(0)
    for i, bj in enumerate(basis):
        if bj < n:
            x[bj] = T[i][n]
        else:
            objective += T[i][n]
    return PhaseOneResult(status, objective, x, it)
