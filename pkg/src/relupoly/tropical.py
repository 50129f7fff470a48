"""Tropical weights on facets, the breakpoint complex, transparency and LRA."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .complex import CanonicalComplex, Facet
from .linalg import canonical_hyperplane, dot, fmt_rational, mat_mul, mat_vec, norm2, transpose, vec, vsub
from .lp import Polyhedron, max_slack
from .net import Network, _select


@dataclass(frozen=True)
class Weight:
    """The vector sqrt(scale2) * direction, compared exactly."""
    direction: tuple
    scale2: Fraction

    def __eq__(self, other):
        if not isinstance(other, Weight):
            return NotImplemented
        if len(self.direction) != len(other.direction):
            return False
        for a, b in zip(self.direction, other.direction):
            if (a > 0) != (b > 0) or (a < 0) != (b < 0):
                return False
            if a * a * self.scale2 != b * b * other.scale2:
                return False
        return True

    def __hash__(self):
        return hash(tuple((v > 0) - (v < 0) for v in self.direction))

    def is_zero(self) -> bool:
        return self.scale2 == 0 or all(v == 0 for v in self.direction)

    def to_float(self) -> tuple:
        s = math.sqrt(self.scale2)
        return tuple(float(v) * s for v in self.direction)


@dataclass(frozen=True)
class FacetWeight:
    w: tuple          # (A_P - A_Q) n, n the canonical normal pointing into P
    n: tuple
    norm2: Fraction

    @property
    def c(self) -> Weight:
        """True tropical weight w / |n|."""
        return Weight(self.w, 1 / self.norm2)

    def is_zero(self) -> bool:
        return all(v == 0 for v in self.w)

    def to_json(self) -> dict:
        return {"w": [fmt_rational(v) for v in self.w], "n": [fmt_rational(v) for v in self.n],
                "norm2": fmt_rational(self.norm2)}


def weight_from_pieces(A_P, A_Q, normal) -> FacetWeight:
    """w = (A_P - A_Q) n for a normal n pointing into P."""
    D = tuple(vsub(r1, r2) for r1, r2 in zip(A_P, A_Q))
    n = vec(normal)
    return FacetWeight(mat_vec(D, n), n, norm2(n))


def facet_weight(cx: CanonicalComplex, sigma) -> FacetWeight:
    f = cx.facets[sigma] if isinstance(sigma, int) else sigma
    if len(f.regions) != 2:
        raise ValueError("facet adjacency missing")
    P, Q = (cx.regions[i] for i in f.regions)
    return weight_from_pieces(P.piece.A, Q.piece.A, f.hyperplane[0])


def facet_weight_closed_form(net: Network, f: Facet) -> Weight:
    """||g|| * v with g the incoming gradient of the incident neuron and v its forward product."""
    if len(f.neurons) != 1:
        raise ValueError(f"facet {f.index} lies on {len(f.neurons)} bent hyperplanes")
    l, i = f.neurons[0]
    S = [frozenset(j for j, s in enumerate(layer) if s > 0) for layer in f.signs]
    # g = e_i^T W^l D_{S_{l-1}} ... D_{S_1} W^1
    g = net.weights[0]
    for k in range(1, l):
        g = mat_mul(_select(net.weights[k], S[k - 1]), g)
    g = g[i]
    # v = W^{L+1} D_{S_L} ... W^{l+1} e_i
    v = tuple(Fraction(int(r == i)) for r in range(net.architecture[l]))
    for k in range(l, net.depth + 1):
        W = net.weights[k]
        if k < net.depth:
            W = tuple(row if r in S[k] else tuple(Fraction(0) for _ in row) for r, row in enumerate(W))
        v = mat_vec(W, v)
    return Weight(v, norm2(g))


def one_layer_weight(net: Network, H) -> Weight:
    """Sum of W2[:, i] * ||W1_i|| over the neurons whose hyperplane is H."""
    if net.depth != 1:
        raise ValueError("one_layer_weight needs a single hidden layer")
    n, off = canonical_hyperplane(*H)
    total = [Fraction(0)] * net.output_dim
    found = False
    for i, (row, b) in enumerate(zip(net.weights[0], net.biases[0])):
        if all(v == 0 for v in row):
            continue
        if canonical_hyperplane(row, b) != (n, off):
            continue
        found = True
        lam = next(r / m for r, m in zip(row, n) if m != 0)
        for k in range(net.output_dim):
            total[k] += abs(lam) * net.weights[1][k][i]
    if not found:
        raise ValueError("hyperplane is not among the layer's hyperplanes")
    return Weight(tuple(total), norm2(n))


@dataclass
class BreakpointComplex:
    cx: CanonicalComplex
    weights: dict         # facet index -> FacetWeight (all facets)
    facets: list          # indices with nonzero weight
    ridges: list          # ridge indices with at least one breakpoint facet in the star

    def star(self, ridge_index):
        fs = set(self.facets)
        return [i for i in self.cx.ridges[ridge_index].facets if i in fs]


def all_weights(cx: CanonicalComplex) -> dict:
    return {f.index: facet_weight(cx, f) for f in cx.facets}


def breakpoint_complex(cx: CanonicalComplex) -> BreakpointComplex:
    ws = all_weights(cx)
    facets = [i for i, w in ws.items() if not w.is_zero()]
    fs = set(facets)
    ridges = [r.index for r in cx.ridges if any(i in fs for i in r.facets)]
    return BreakpointComplex(cx, ws, sorted(facets), ridges)


def _meets_relint(poly: Polyhedron, X: Polyhedron | None) -> bool:
    if X is None:
        return True
    Q = Polyhedron(poly.ineqs + X.ineqs, poly.eqs + X.eqs, poly.dim)
    strict = range(len(poly.ineqs), len(poly.ineqs) + len(X.ineqs))
    r = max_slack(Q, strict=strict)
    return r is not None and r[0] > 0


def facets_meeting(cx: CanonicalComplex, X: Polyhedron | None):
    return [f for f in cx.facets if _meets_relint(f.poly, X)]


def lra_check(cx: CanonicalComplex, X: Polyhedron | None = None, weights=None):
    """(ok, offending facet indices): every facet meeting relint X has nonzero weight."""
    ws = weights or all_weights(cx)
    bad = [f.index for f in facets_meeting(cx, X) if ws[f.index].is_zero()]
    return not bad, bad


def transparency_check(cx: CanonicalComplex, l: int, X: Polyhedron | None = None):
    """(ok, witnesses): no cell of C_{l-1} meeting X has a point where all of layer l is negative."""
    net = cx.net
    if not 2 <= l <= net.depth:
        raise ValueError("transparency is defined for layers 2..L")
    from .net import active_sets, layer_maps
    bad = []
    d = cx.dim
    for cell in cx.stages[l - 2]:
        M, c = layer_maps(net, active_sets(cell.signs))[l - 1]
        rows = list(cell.rows) + [(tuple(-v for v in a), -b) for a, b in zip(M, c)]
        strict = range(len(cell.rows), len(rows))
        P = Polyhedron(tuple(rows), (), d)
        if X is not None:
            P = Polyhedron(P.ineqs + X.ineqs, X.eqs, d)
        r = max_slack(P, strict=strict)
        if r is not None and r[0] > 0:
            bad.append({"cell": [list(s) for s in cell.signs], "point": r[1]})
    return not bad, bad


def weight_table(bc: BreakpointComplex) -> dict:
    return {str(i): w.to_json() for i, w in sorted(bc.weights.items())}
