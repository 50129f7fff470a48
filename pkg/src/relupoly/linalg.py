"""Exact rational linear algebra on tuples of Fractions."""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

Vec = tuple
Mat = tuple


def parse_rational(value) -> Fraction:
    """Parse ints, Fractions, "p/q" strings and decimal strings exactly."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        # floats are taken at face value of their shortest repr
        return Fraction(repr(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot parse {value!r} as a rational")


def fmt_rational(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def vec(values) -> Vec:
    return tuple(parse_rational(v) for v in values)


def mat(rows) -> Mat:
    return tuple(vec(r) for r in rows)


def dot(a: Sequence, b: Sequence):
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def mat_vec(M: Sequence[Sequence], x: Sequence) -> Vec:
    return tuple(dot(row, x) for row in M)


def vec_mat(x: Sequence, M: Sequence[Sequence]) -> Vec:
    if not M:
        return ()
    return tuple(dot(x, col) for col in zip(*M))


def mat_mul(A: Sequence[Sequence], B: Sequence[Sequence]) -> Mat:
    cols = list(zip(*B)) if B else []
    return tuple(tuple(dot(row, c) for c in cols) for row in A)


def transpose(M: Sequence[Sequence]) -> Mat:
    return tuple(zip(*M)) if M else ()


def identity(n: int) -> Mat:
    return tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))


def zeros(r: int, c: int) -> Mat:
    return tuple((Fraction(0),) * c for _ in range(r))


def vsub(a, b) -> Vec:
    return tuple(x - y for x, y in zip(a, b))


def vadd(a, b) -> Vec:
    return tuple(x + y for x, y in zip(a, b))


def vscale(s, a) -> Vec:
    return tuple(s * x for x in a)


def norm2(a) -> Fraction:
    return dot(a, a)


def is_zero(a) -> bool:
    return all(x == 0 for x in a)


def _lcm_den(values) -> int:
    out = 1
    for v in values:
        out = out * v.denominator // math.gcd(out, v.denominator)
    return out


def integer_row(row: Sequence[Fraction]) -> list[int]:
    """Scale a rational row by a positive factor to coprime integers."""
    L = _lcm_den(row)
    ints = [int(v * L) for v in row]
    g = math.gcd(*ints) if ints else 0
    if g > 1:
        ints = [v // g for v in ints]
    return ints


def exact_rank(M: Sequence[Sequence]) -> int:
    """Rank over Q by fraction-free (Bareiss) elimination on integer rows."""
    rows = [integer_row([parse_rational(v) for v in r]) for r in M]
    rows = [r for r in rows if any(r)]
    if not rows:
        return 0
    ncol = len(rows[0])
    rank = 0
    prev = 1
    for c in range(ncol):
        piv = next((i for i in range(rank, len(rows)) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        p = rows[rank][c]
        for i in range(rank + 1, len(rows)):
            f = rows[i][c]
            rows[i] = [(p * rows[i][k] - f * rows[rank][k]) // prev for k in range(ncol)]
        prev = p
        rank += 1
        if rank == len(rows):
            break
    return rank


def rref(M: Sequence[Sequence]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over Fractions and its pivot columns."""
    R = [[parse_rational(v) for v in r] for r in M]
    pivots: list[int] = []
    if not R:
        return R, pivots
    ncol = len(R[0])
    r = 0
    for c in range(ncol):
        piv = next((i for i in range(r, len(R)) if R[i][c] != 0), None)
        if piv is None:
            continue
        R[r], R[piv] = R[piv], R[r]
        p = R[r][c]
        R[r] = [v / p for v in R[r]]
        for i in range(len(R)):
            if i != r and R[i][c] != 0:
                f = R[i][c]
                R[i] = [a - f * b for a, b in zip(R[i], R[r])]
        pivots.append(c)
        r += 1
        if r == len(R):
            break
    return R, pivots


def rank_rref(M) -> int:
    return len(rref(M)[1])


def nullspace(M: Sequence[Sequence], ncol: int | None = None) -> list[Vec]:
    """Basis of {x : M x = 0}."""
    if ncol is None:
        ncol = len(M[0])
    if not M:
        return [tuple(Fraction(int(i == j)) for j in range(ncol)) for i in range(ncol)]
    R, pivots = rref(M)
    free = [c for c in range(ncol) if c not in pivots]
    basis = []
    for f in free:
        x = [Fraction(0)] * ncol
        x[f] = Fraction(1)
        for i, p in enumerate(pivots):
            x[p] = -R[i][f]
        basis.append(tuple(x))
    return basis


def solve(A: Sequence[Sequence], b: Sequence) -> Vec | None:
    """Some solution of A x = b, or None when inconsistent."""
    n = len(A[0])
    aug = [list(r) + [parse_rational(v)] for r, v in zip(A, b)]
    R, pivots = rref(aug)
    if n in pivots:
        return None
    x = [Fraction(0)] * n
    for i, p in enumerate(pivots):
        x[p] = R[i][n]
    return tuple(x)


def solve_unique(A, b) -> Vec | None:
    if rank_rref(A) < len(A[0]):
        return None
    return solve(A, b)


def inverse(M: Sequence[Sequence]) -> Mat:
    n = len(M)
    aug = [list(r) + list(e) for r, e in zip(M, identity(n))]
    R, pivots = rref(aug)
    if pivots[:n] != list(range(n)):
        raise ZeroDivisionError("matrix is singular")
    return tuple(tuple(r[n:]) for r in R)


def primitive(v: Sequence[Fraction]) -> tuple[Vec, Fraction]:
    """Positive multiple of v with coprime integer entries, and the factor used."""
    L = _lcm_den(v)
    ints = [int(x * L) for x in v]
    g = math.gcd(*ints)
    if g == 0:
        raise ValueError("zero vector has no primitive form")
    return tuple(Fraction(x // g) for x in ints), Fraction(L, g)


def canonical_hyperplane(a: Sequence, b) -> tuple[Vec, Fraction]:
    """Unique representative (n, c) of {a.x + b = 0}: n primitive integer, first nonzero entry positive."""
    a = vec(a)
    b = parse_rational(b)
    n, s = primitive(a)
    first = next(x for x in n if x != 0)
    if first < 0:
        s = -s
        n = tuple(-x for x in n)
    return n, b * s
