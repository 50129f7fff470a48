"""Hyperplane arrangements: essentialization, genericity and small-dimension vertices."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from .linalg import canonical_hyperplane, dot, exact_rank, is_zero, nullspace, rref, solve_unique, vec
from .lp import Polyhedron


@dataclass
class Essentialized:
    hyperplanes: list  # (normal in span coordinates, offset)
    span_basis: list   # rows spanning the normals' row space
    lineality: list    # basis of the common lineality space


def essentialize(H) -> Essentialized:
    """Project an arrangement onto the span of its normals.

    With B a basis of the normals' row space, a point y in span coordinates
    stands for x = B^T y, so hyperplane (a, b) becomes (B a, b).
    """
    H = [(vec(a), Fraction(b)) for a, b in H]
    if not H:
        raise ValueError("empty arrangement")
    normals = [a for a, _ in H]
    d = len(normals[0])
    R, piv = rref(normals)
    basis = [tuple(r) for r in R[:len(piv)]]
    lineality = nullspace(normals, d)
    projected = [(tuple(dot(row, a) for row in basis), b) for a, b in H]
    return Essentialized(projected, basis, lineality)


def is_generic_arrangement(H) -> bool:
    """Every k <= r hyperplanes meet in codimension k and no r + 1 share a point (r = rank)."""
    if not H:
        return True
    E = essentialize(H)
    hs = E.hyperplanes
    r = len(E.span_basis)
    if r == 0:
        return False
    for k in range(1, min(r, len(hs)) + 1):
        for S in combinations(hs, k):
            if exact_rank([a for a, _ in S]) < k:
                return False
    for S in combinations(hs, r + 1):
        A = [a for a, _ in S]
        aug = [list(a) + [b] for a, b in S]
        if exact_rank(aug) == exact_rank(A):
            return False
    return True


def vertices(P: Polyhedron) -> list:
    """Vertices of a bounded polyhedron by brute force over d-subsets of rows (d <= 3)."""
    d = P.dim
    eqs = list(P.eqs)
    eq_rank = exact_rank([a for a, _ in eqs]) if eqs else 0
    need = d - eq_rank
    out = []
    seen = set()
    for S in combinations(range(len(P.ineqs)), need):
        rows = eqs + [P.ineqs[i] for i in S]
        A = [a for a, _ in rows]
        if exact_rank(A) < d:
            continue
        x = solve_unique(A, [-b for _, b in rows])
        if x is None or x in seen:
            continue
        if P.contains(x):
            seen.add(x)
            out.append(x)
    return out


def generic_arrangement_in_region(H, R: Polyhedron, skip_rows=()) -> bool:
    """Genericity of H inside a full-dimensional region R.

    Vertices of R lying on any row listed in skip_rows (indices into
    R.ineqs, typically the working-box faces) are not tested.
    """
    H = [(vec(a), Fraction(b)) for a, b in H]
    if any(is_zero(a) for a, _ in H):
        return False
    if not is_generic_arrangement(H):
        return False
    skip = [R.ineqs[i] for i in skip_rows]
    for v in vertices(R):
        if any(dot(a, v) + b == 0 for a, b in skip):
            continue
        if any(dot(a, v) + b == 0 for a, b in H):
            return False
    return True


def same_hyperplane(h1, h2) -> bool:
    return canonical_hyperplane(*h1) == canonical_hyperplane(*h2)
