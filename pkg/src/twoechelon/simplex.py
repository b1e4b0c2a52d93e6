"""Dense two-phase simplex with dual extraction.

Small LP core for the restricted master problems: a handful of rows, a few
hundred columns.  Dantzig pricing with a Bland fallback once the objective
stalls, so degenerate masters cannot cycle.
"""

from __future__ import annotations

from typing import List, Sequence, Tuple

import numpy as np

TOL = 1e-9
FEAS_TOL = 1e-7
STALL_LIMIT = 80


class LpError(Exception):
    """Infeasible, unbounded, or numerically stuck linear program."""


def _pivot(T: np.ndarray, row: int, col: int) -> None:
    T[row] /= T[row, col]
    piv = T[:, col].copy()
    piv[row] = 0.0
    T -= np.outer(piv, T[row])


def _leaving_row(T: np.ndarray, basis: List[int], col: int,
                 bland: bool) -> int:
    m = T.shape[0] - 1
    best, ties = None, []
    for r in range(m):
        a = T[r, col]
        if a > TOL:
            ratio = T[r, -1] / a
            if best is None or ratio < best - TOL:
                best, ties = ratio, [r]
            elif ratio <= best + TOL:
                ties.append(r)
    if not ties:
        return -1
    if bland:
        return min(ties, key=lambda r: basis[r])
    return ties[0]


def _run_simplex(T: np.ndarray, basis: List[int], n_price: int,
                 max_iter: int) -> None:
    """Minimize the objective row in place; only the first n_price columns
    may enter the basis."""
    stall = 0
    bland = False
    prev_obj = T[-1, -1]
    for _ in range(max_iter):
        if bland:
            col = -1
            for j in range(n_price):
                if T[-1, j] < -TOL:
                    col = j
                    break
        else:
            j = int(np.argmin(T[-1, :n_price]))
            col = j if T[-1, j] < -TOL else -1
        if col < 0:
            return
        row = _leaving_row(T, basis, col, bland)
        if row < 0:
            raise LpError("unbounded linear program")
        _pivot(T, row, col)
        basis[row] = col
        obj = T[-1, -1]
        if abs(obj - prev_obj) <= TOL:
            stall += 1
            if stall >= STALL_LIMIT:
                bland = True
        else:
            stall = 0
            bland = False
        prev_obj = obj
    raise LpError("simplex iteration cap reached")


def lp_solve(A: Sequence[Sequence[float]], b: Sequence[float],
             c: Sequence[float], senses: Sequence[str],
             max_iter: int = 20000) -> Tuple[np.ndarray, np.ndarray, float]:
    """Minimize c.x subject to rows of A x (=|<=|>=) b, x >= 0.

    Returns (x, duals, objective) with one dual per row (c_B B^-1
    convention, so reduced costs are c_j - y.A_j).
    """
    A = np.array(A, dtype=float)
    if A.ndim != 2:
        raise ValueError("A must be a matrix")
    b = np.array(b, dtype=float)
    c = np.array(c, dtype=float)
    senses = list(senses)
    m, n = A.shape
    if len(senses) != m or b.shape != (m,) or c.shape != (n,):
        raise ValueError("inconsistent LP shapes")
    flip = np.ones(m)
    for i in range(m):
        if senses[i] not in ("=", "<=", ">="):
            raise ValueError("bad row sense %r" % senses[i])
        if b[i] < 0:
            A[i] *= -1.0
            b[i] = -b[i]
            flip[i] = -1.0
            senses[i] = {"<=": ">=", ">=": "<=", "=": "="}[senses[i]]

    blocks = [A]
    slack_col = {}
    for i, s in enumerate(senses):
        if s in ("<=", ">="):
            e = np.zeros((m, 1))
            e[i, 0] = 1.0 if s == "<=" else -1.0
            slack_col[i] = n + len(blocks) - 1
            blocks.append(e)
    n_std = n + len(blocks) - 1
    art_rows = [i for i, s in enumerate(senses) if s != "<="]
    art_col = {}
    for i in art_rows:
        e = np.zeros((m, 1))
        e[i, 0] = 1.0
        art_col[i] = n_std + len(art_col)
        blocks.append(e)
    full = np.hstack(blocks)
    n_full = full.shape[1]
    cfull = np.zeros(n_full)
    cfull[:n] = c

    T = np.zeros((m + 1, n_full + 1))
    T[:m, :n_full] = full
    T[:m, -1] = b
    basis = [slack_col[i] if senses[i] == "<=" else art_col[i]
             for i in range(m)]

    if art_rows:
        T[-1, n_std:n_full] = 1.0
        for i in art_rows:
            T[-1] -= T[i]
        _run_simplex(T, basis, n_full, max_iter)
        if T[-1, -1] < -FEAS_TOL:
            raise LpError("infeasible linear program (residual %.3g)"
                          % -T[-1, -1])
        for r in range(m):
            if basis[r] >= n_std:               # drive artificials out
                for j in range(n_std):
                    if abs(T[r, j]) > FEAS_TOL:
                        _pivot(T, r, j)
                        basis[r] = j
                        break

    T[-1, :] = 0.0
    T[-1, :n] = c
    for r in range(m):
        cb = T[-1, basis[r]]
        if cb != 0.0:
            T[-1] -= cb * T[r]
    _run_simplex(T, basis, n_std, max_iter)

    x = np.zeros(n_full)
    for r in range(m):
        x[basis[r]] = T[r, -1]
    if n_std < n_full and x[n_std:].max(initial=0.0) > FEAS_TOL:
        raise LpError("infeasible linear program (artificial stuck basic)")
    obj = float(c @ x[:n])

    B = full[:, basis]
    try:
        y = np.linalg.solve(B.T, cfull[basis])
    except np.linalg.LinAlgError:
        y, *_ = np.linalg.lstsq(B.T, cfull[basis], rcond=None)
    return x[:n], y * flip, obj
