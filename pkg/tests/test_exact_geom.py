from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import linprog

from relupoly.arrangement import essentialize, generic_arrangement_in_region, is_generic_arrangement, vertices
from relupoly.linalg import exact_rank, fmt_rational, mat_mul, nullspace, parse_rational, rref, solve_unique
from relupoly.lp import INFEASIBLE, OPTIMAL, UNBOUNDED, Polyhedron, linprog_max, lp_feasible, max_slack, polyhedron_dim, relint_point

from strategies import matrices, small, vectors


# rationals

def test_parse_decimal_exactly():
    assert parse_rational("0.1") == F(1, 10)
    assert parse_rational("-3/4") == F(-3, 4)
    assert parse_rational(2) == 2


def test_fmt_roundtrip():
    for q in [F(0), F(-7, 3), F(5), F(1, 10 ** 12)]:
        assert parse_rational(fmt_rational(q)) == q


# LP feasibility

def test_contradictory_half_lines_empty():
    P = Polyhedron.make([((1,), 0), ((-1,), -1)])
    assert lp_feasible(P) is None


def test_interval_has_witness():
    P = Polyhedron.make([((1,), 0), ((-1,), 1)])
    x = lp_feasible(P)
    assert x is not None and 0 <= x[0] <= 1


def test_square_diagonal_witness():
    square = Polyhedron.make([((1, 0), 0), ((0, 1), 0), ((-1, 0), 1), ((0, -1), 1)])
    P = square.add(eqs=[((F(1), F(1)), F(-1))])
    x = lp_feasible(P)
    assert x[0] + x[1] == 1 and P.contains(x)


def test_dimensions():
    assert polyhedron_dim(Polyhedron.make([((1,), 0), ((-1,), -1)])) == -1
    assert polyhedron_dim(Polyhedron.make(eqs=[((1, 1), -1)])) == 1
    square = Polyhedron.make([((1, 0), 0), ((0, 1), 0), ((-1, 0), 1), ((0, -1), 1)])
    assert polyhedron_dim(square) == 2


def test_implicit_equality_found():
    # x >= 0 and -x >= 0 in the plane: a line
    P = Polyhedron.make([((1, 0), 0), ((-1, 0), 0), ((0, 1), 1), ((0, -1), 1)])
    assert polyhedron_dim(P) == 1
    x = relint_point(P)
    assert x[0] == 0 and -1 < x[1] < 1


def test_max_slack_caps_at_one():
    t, x = max_slack(Polyhedron.box(2, 10))
    assert t == 1


def test_unbounded_and_infeasible_status():
    assert linprog_max([1], le=[((-1,), 0)]).status == UNBOUNDED
    assert linprog_max([1], le=[((1,), -1), ((-1,), -1)]).status == INFEASIBLE


@st.composite
def bounded_lps(draw):
    n = draw(st.integers(1, 3))
    m = draw(st.integers(1, 4))
    A = draw(matrices(m, n))
    b = draw(vectors(m, st.fractions(min_value=0, max_value=4, max_denominator=4)))
    c = draw(vectors(n))
    return n, A, b, c


@given(bounded_lps())
def test_lp_value_matches_scipy(lp):
    """max c.x s.t. A x <= b, |x_i| <= 5: the exact value agrees with HiGHS."""
    n, A, b, c = lp
    le = [(tuple(r), bi) for r, bi in zip(A, b)]
    for i in range(n):
        e = tuple(F(int(i == j)) for j in range(n))
        le += [(e, F(5)), (tuple(-v for v in e), F(5))]
    res = linprog_max(c, le)
    ref = linprog([-float(v) for v in c], A_ub=[[float(v) for v in a] for a, _ in le],
                  b_ub=[float(v) for _, v in le], bounds=[(None, None)] * n, method="highs")
    assert res.status == OPTIMAL and ref.status == 0
    assert abs(float(res.value) + ref.fun) < 1e-7
    assert all(sum(a * x for a, x in zip(row, res.x)) <= rhs for row, rhs in le)


# exact linear algebra

def test_rank_examples():
    assert exact_rank([[1, 0, 0], [0, 1, 0], [0, 0, 1]]) == 3
    assert exact_rank([[1, 2], [2, 4]]) == 1
    W, W2 = [[1, 2], [3, 4]], [[5, 6], [7, 8]]
    D = [[0, 0], [0, 0]]
    assert exact_rank(mat_mul(mat_mul(W, D), W2)) == 0


@given(st.integers(1, 4), st.integers(1, 4), st.data())
def test_rank_matches_numpy(r, c, data):
    M = data.draw(matrices(r, c, st.integers(-3, 3).map(F)))
    assert exact_rank(M) == np.linalg.matrix_rank(np.array(M, dtype=float))


@given(st.integers(1, 4), st.integers(1, 4), st.data())
def test_nullspace_is_kernel(r, c, data):
    M = data.draw(matrices(r, c))
    N = nullspace(M, c)
    assert len(N) + exact_rank(M) == c
    for v in N:
        assert all(sum(a * x for a, x in zip(row, v)) == 0 for row in M)


@given(st.integers(1, 4), st.data())
def test_solve_unique_solves(n, data):
    A = data.draw(matrices(n, n))
    x = data.draw(vectors(n))
    b = [sum(a * v for a, v in zip(row, x)) for row in A]
    sol = solve_unique(A, b)
    if exact_rank(A) == n:
        assert list(sol) == x
    else:
        assert sol is None


def test_rref_pivots():
    R, piv = rref([[2, 4], [1, 3]])
    assert piv == [0, 1] and R == [[1, 0], [0, 1]]


# arrangements

def test_essentialize_examples():
    parallel = essentialize([((1, 0), 0), ((1, 0), -1)])
    assert len(parallel.span_basis) == 1 and len(parallel.lineality) == 1
    crossing = essentialize([((1, 0), 0), ((0, 1), 0)])
    assert len(crossing.span_basis) == 2 and crossing.lineality == []
    single = essentialize([((1, 2, 3), 4)])
    assert len(single.span_basis) == 1 and len(single.lineality) == 2


def test_genericity_examples():
    plane = Polyhedron.box(2, 100)
    assert generic_arrangement_in_region([((1, 0), 0), ((0, 1), 0)], plane, skip_rows=range(4))
    concurrent = [((1, 0), 0), ((0, 1), 0), ((1, 1), 0)]
    assert not is_generic_arrangement(concurrent)
    square = Polyhedron.make([((1, 0), 0), ((0, 1), 0), ((-1, 0), 1), ((0, -1), 1)])
    # x + y = 0 passes through the vertex (0, 0) of the square
    assert not generic_arrangement_in_region([((1, 1), 0)], square)
    assert generic_arrangement_in_region([((1, 1), F(-1, 2))], square)


def test_vertices_of_square():
    sq = Polyhedron.make([((1, 0), 0), ((0, 1), 0), ((-1, 0), 1), ((0, -1), 1)])
    assert sorted(vertices(sq)) == [(0, 0), (0, 1), (1, 0), (1, 1)]


def test_vertices_with_equality():
    seg = Polyhedron.box(2, 1).add(eqs=[((1, -1), 0)])
    assert sorted(vertices(seg)) == [(-1, -1), (1, 1)]
