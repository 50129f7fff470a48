"""Exact LP over the rationals: two-phase simplex with Bland's rule.

The tableau is kept fraction-free.  Every row is a list of Python ints whose
basic coefficient is positive (not necessarily 1); a pivot cross-multiplies
and divides out the row gcd, so numbers stay as small as the data allows.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .linalg import dot, exact_rank, integer_row, parse_rational, vec

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


class LPStats:
    calls = 0
    pivots = 0


def _reduce(row: list[int]) -> list[int]:
    g = math.gcd(*row)
    if g > 1:
        return [v // g for v in row]
    return row


@dataclass
class LPResult:
    status: str
    x: tuple | None = None
    value: Fraction | None = None


def _pivot(T, obj, basis, r, c):
    p = T[r][c]
    prow = T[r]
    for i, row in enumerate(T):
        if i != r and row[c] != 0:
            f = row[c]
            T[i] = _reduce([p * a - f * b for a, b in zip(row, prow)])
    if obj[c] != 0:
        f = obj[c]
        obj[:] = _reduce([p * a - f * b for a, b in zip(obj, prow)])
    T[r] = _reduce(prow)
    basis[r] = c
    LPStats.pivots += 1


def _run(T, obj, basis, allowed):
    """Maximize; obj holds reduced costs (positive = improving). Returns status."""
    rhs = len(T[0]) - 1 if T else len(obj) - 1
    while True:
        enter = next((j for j in allowed if obj[j] > 0), None)
        if enter is None:
            return OPTIMAL
        best = None
        for i, row in enumerate(T):
            a = row[enter]
            if a > 0:
                if best is None:
                    best = i
                    continue
                # compare row[rhs]/a with T[best][rhs]/T[best][enter]
                lhs = row[rhs] * T[best][enter]
                rhs_v = T[best][rhs] * a
                if lhs < rhs_v or (lhs == rhs_v and basis[i] < basis[best]):
                    best = i
        if best is None:
            return UNBOUNDED
        _pivot(T, obj, basis, best, enter)


def _price(obj_coeffs, T, basis):
    """Reduced-cost row for maximizing obj_coeffs . vars given the basis."""
    obj = integer_row([Fraction(v) for v in obj_coeffs]) if any(obj_coeffs) else [0] * len(obj_coeffs)
    for r, b in enumerate(basis):
        if obj[b] != 0:
            p = T[r][b]
            f = obj[b]
            obj = _reduce([p * a - f * bb for a, bb in zip(obj, T[r])])
    return obj


def linprog_max(c: Sequence, le: Sequence = (), eq: Sequence = ()) -> LPResult:
    """Maximize c.x over free x subject to rows (a, b) meaning a.x <= b (le) or a.x = b (eq)."""
    LPStats.calls += 1
    n = len(c)
    rows = [(vec(a), parse_rational(b), True) for a, b in le] + [(vec(a), parse_rational(b), False) for a, b in eq]
    m = len(rows)
    n_slack = sum(1 for r in rows if r[2])
    ncols_base = 2 * n + n_slack
    # decide which rows need artificials
    signs = []
    need_art = []
    for a, b, is_le in rows:
        s = -1 if b < 0 else 1
        signs.append(s)
        need_art.append((not is_le) or s < 0)
    n_art = sum(need_art)
    width = ncols_base + n_art + 1
    T: list[list[int]] = []
    basis: list[int] = []
    slack_i = 2 * n
    art_i = ncols_base
    for (a, b, is_le), s, art in zip(rows, signs, need_art):
        row = [Fraction(0)] * width
        for j in range(n):
            row[j] = s * a[j]
            row[n + j] = -s * a[j]
        if is_le:
            row[slack_i] = Fraction(s)
            if not art:
                basic = slack_i
            slack_i += 1
        if art:
            row[art_i] = Fraction(1)
            basic = art_i
            art_i += 1
        row[-1] = s * b
        T.append(integer_row(row) if any(row) else [0] * width)
        basis.append(basic)
    # phase I
    if n_art:
        cost = [0] * width
        for j in range(ncols_base, ncols_base + n_art):
            cost[j] = -1
        obj = _price(cost, T, basis)
        _run(T, obj, basis, range(width - 1))
        for r, b in enumerate(basis):
            if b >= ncols_base and T[r][-1] != 0:
                return LPResult(INFEASIBLE)
        # drive artificials out of the basis
        r = 0
        while r < len(T):
            if basis[r] >= ncols_base:
                k = next((j for j in range(ncols_base) if T[r][j] != 0), None)
                if k is None:
                    del T[r]
                    del basis[r]
                    continue
                if T[r][k] < 0:
                    T[r] = [-v for v in T[r]]
                dummy = [0] * width
                _pivot(T, dummy, basis, r, k)
            r += 1
    cost = [Fraction(0)] * width
    for j in range(n):
        cost[j] = parse_rational(c[j])
        cost[n + j] = -parse_rational(c[j])
    obj = _price(cost, T, basis)
    status = _run(T, obj, basis, range(ncols_base))
    if status == UNBOUNDED:
        return LPResult(UNBOUNDED)
    vals = [Fraction(0)] * width
    for r, b in enumerate(basis):
        vals[b] = Fraction(T[r][-1], T[r][b])
    x = tuple(vals[j] - vals[n + j] for j in range(n))
    return LPResult(OPTIMAL, x, dot(vec(c), x))


@dataclass(frozen=True)
class Polyhedron:
    """{x : a.x + b >= 0 for (a, b) in ineqs, a.x + b = 0 for (a, b) in eqs}."""
    ineqs: tuple = ()
    eqs: tuple = ()
    dim: int = field(default=0)

    @staticmethod
    def make(ineqs=(), eqs=(), dim=None) -> "Polyhedron":
        ineqs = tuple((vec(a), parse_rational(b)) for a, b in ineqs)
        eqs = tuple((vec(a), parse_rational(b)) for a, b in eqs)
        if dim is None:
            first = (ineqs + eqs)[0]
            dim = len(first[0])
        return Polyhedron(ineqs, eqs, dim)

    @staticmethod
    def box(d: int, R) -> "Polyhedron":
        R = parse_rational(R)
        rows = []
        for i in range(d):
            e = tuple(Fraction(int(i == j)) for j in range(d))
            rows.append((e, R))
            rows.append((tuple(-v for v in e), R))
        return Polyhedron(tuple(rows), (), d)

    def intersect(self, other: "Polyhedron") -> "Polyhedron":
        return Polyhedron(self.ineqs + other.ineqs, self.eqs + other.eqs, self.dim)

    def add(self, ineqs=(), eqs=()) -> "Polyhedron":
        return Polyhedron(self.ineqs + tuple(ineqs), self.eqs + tuple(eqs), self.dim)

    def contains(self, x, strict=False) -> bool:
        for a, b in self.eqs:
            if dot(a, x) + b != 0:
                return False
        for a, b in self.ineqs:
            v = dot(a, x) + b
            if v < 0 or (strict and v == 0):
                return False
        return True


def maximize(P: Polyhedron, obj, extra_le=()) -> LPResult:
    le = [(tuple(-v for v in a), b) for a, b in P.ineqs] + list(extra_le)
    eq = [(a, -b) for a, b in P.eqs]
    return linprog_max(obj, le, eq)


def lp_feasible(P: Polyhedron):
    """A feasible point of P, or None when P is empty."""
    res = maximize(P, [0] * P.dim)
    return res.x if res.status == OPTIMAL else None


def max_slack(P: Polyhedron, strict=None):
    """Maximize t <= 1 such that the chosen inequality rows hold with value >= t.

    Returns (t, x) or None when P is empty.  strict=None makes every row strict.
    """
    d = P.dim
    idx = range(len(P.ineqs)) if strict is None else set(strict)
    le = []
    for i, (a, b) in enumerate(P.ineqs):
        row = tuple(-v for v in a) + ((Fraction(1),) if i in idx else (Fraction(0),))
        le.append((row, b))
    le.append(((Fraction(0),) * d + (Fraction(1),), Fraction(1)))
    eq = [(tuple(a) + (Fraction(0),), -b) for a, b in P.eqs]
    res = linprog_max([0] * d + [1], le, eq)
    if res.status != OPTIMAL or res.x[-1] < 0:
        return None
    return res.x[-1], res.x[:d]


def strictly_feasible(P: Polyhedron, strict=None):
    """Point satisfying the chosen rows strictly (all eqs exactly), else None."""
    r = max_slack(P, strict)
    if r is None or r[0] <= 0:
        return None
    return r[1]


@dataclass
class AffineHull:
    dim: int
    point: tuple | None
    implicit: tuple  # indices of inequality rows that vanish on all of P


def affine_hull(P: Polyhedron) -> AffineHull:
    """Dimension, a relative-interior point and the implicit equalities of P."""
    r = max_slack(P)
    if r is None:
        return AffineHull(-1, None, ())
    t, x = r
    d = P.dim
    if t > 0:
        return AffineHull(d - exact_rank([a for a, _ in P.eqs]) if P.eqs else d, x, ())
    # some rows are implicit equalities; find them one by one
    unknown = [i for i, (a, b) in enumerate(P.ineqs) if dot(a, x) + b == 0]
    loose = set(range(len(P.ineqs))) - set(unknown)
    implicit = []
    while unknown:
        i = unknown.pop(0)
        a, b = P.ineqs[i]
        res = maximize(P, a, extra_le=[(a, 1 - b)])
        y = res.x
        if res.value + b > 0:
            for j in list(unknown):
                aj, bj = P.ineqs[j]
                if dot(aj, y) + bj > 0:
                    unknown.remove(j)
                    loose.add(j)
            loose.add(i)
        else:
            implicit.append(i)
    Q = Polyhedron(tuple(P.ineqs[i] for i in sorted(loose)),
                   P.eqs + tuple(P.ineqs[i] for i in implicit), d)
    r2 = max_slack(Q)
    normals = [a for a, _ in Q.eqs]
    dim = d - (exact_rank(normals) if normals else 0)
    point = r2[1] if r2 is not None and r2[0] > 0 else x
    return AffineHull(dim, point, tuple(sorted(implicit)))


def polyhedron_dim(P: Polyhedron) -> int:
    return affine_hull(P).dim


def relint_point(P: Polyhedron):
    return affine_hull(P).point
