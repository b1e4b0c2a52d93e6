import random

import numpy as np
import pytest
from scipy.optimize import linprog

from twoechelon.simplex import LpError, lp_solve


def test_single_equality_pins_the_variable_and_its_dual():
    x, y, obj = lp_solve([[1.0]], [1.0], [7.5], ["="])
    assert x[0] == pytest.approx(1.0)
    assert y[0] == pytest.approx(7.5)
    assert obj == pytest.approx(7.5)


def test_degenerate_equal_cost_columns_share_a_unique_objective():
    # two identical columns: any split is optimal, the value is not
    A = [[1.0, 1.0]]
    x, y, obj = lp_solve(A, [4.0], [3.0, 3.0], ["="])
    assert obj == pytest.approx(12.0)
    assert x.sum() == pytest.approx(4.0)


def test_unbounded_program_is_reported():
    with pytest.raises(LpError):
        lp_solve([[-1.0]], [1.0], [-1.0], ["<="])


def test_infeasible_program_is_reported():
    with pytest.raises(LpError):
        lp_solve([[1.0], [1.0]], [1.0, 2.0], [1.0], ["=", "="])


def _random_lp(rng):
    m = rng.randrange(1, 6)
    n = rng.randrange(1, 9)
    A = [[rng.uniform(-2.0, 3.0) for _ in range(n)] for _ in range(m)]
    senses = [rng.choice(["=", "<=", ">="]) for _ in range(m)]
    x0 = [abs(rng.uniform(0.0, 3.0)) for _ in range(n)]
    b = []
    for i in range(m):
        v = sum(A[i][j] * x0[j] for j in range(n))
        if senses[i] == "<=":
            v += abs(rng.uniform(0.0, 2.0))
        elif senses[i] == ">=":
            v -= abs(rng.uniform(0.0, 2.0))
        b.append(v)
    c = [rng.uniform(-1.0, 4.0) for _ in range(n)]
    return A, b, c, senses


def _scipy_solve(A, b, c, senses):
    A_eq, b_eq, A_ub, b_ub = [], [], [], []
    for row, rhs, s in zip(A, b, senses):
        if s == "=":
            A_eq.append(row)
            b_eq.append(rhs)
        elif s == "<=":
            A_ub.append(row)
            b_ub.append(rhs)
        else:
            A_ub.append([-v for v in row])
            b_ub.append(-rhs)
    return linprog(c, A_ub=A_ub or None, b_ub=b_ub or None,
                   A_eq=A_eq or None, b_eq=b_eq or None,
                   bounds=[(0, None)] * len(c), method="highs")


def test_random_lps_match_the_reference_solver():
    rng = random.Random(2024)
    solved = 0
    for _ in range(100):
        A, b, c, senses = _random_lp(rng)
        ref = _scipy_solve(A, b, c, senses)
        try:
            x, y, obj = lp_solve(A, b, c, senses)
        except LpError:
            assert ref.status in (2, 3)  # infeasible or unbounded
            continue
        assert ref.status == 0
        assert obj == pytest.approx(ref.fun, abs=1e-6)
        resid = np.asarray(A) @ x
        for i, s in enumerate(senses):
            if s == "=":
                assert resid[i] == pytest.approx(b[i], abs=1e-7)
            elif s == "<=":
                assert resid[i] <= b[i] + 1e-7
            else:
                assert resid[i] >= b[i] - 1e-7
        solved += 1
    assert solved >= 60


def test_duals_certify_optimality_on_random_lps():
    rng = random.Random(77)
    checked = 0
    for _ in range(60):
        A, b, c, senses = _random_lp(rng)
        try:
            x, y, obj = lp_solve(A, b, c, senses)
        except LpError:
            continue
        An = np.asarray(A)
        reduced = np.asarray(c) - y @ An
        assert reduced.min() >= -1e-6          # dual feasibility
        assert float(y @ np.asarray(b)) == pytest.approx(obj, abs=1e-6)
        for i, s in enumerate(senses):
            if s == "<=":
                assert y[i] <= 1e-7
            elif s == ">=":
                assert y[i] >= -1e-7
        checked += 1
    assert checked >= 40
