"""The canonical polyhedral complex of a network inside a working box.

Regions are built layer by layer: every cell of the complex of layers 1..l-1
is split by the zero sets of the layer-l preactivations, which are affine on
the cell.  Facets and ridges are then read off region by region.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from .linalg import canonical_hyperplane, dot, exact_rank, is_zero, mat_vec, solve_unique
from .lp import LPStats, Polyhedron, affine_hull, lp_feasible, max_slack
from .net import AffinePiece, Network, active_sets, layer_maps

DEFAULT_BOX = 8


class ComplexError(RuntimeError):
    pass


@dataclass
class Cell:
    signs: tuple          # per processed layer, signs in {1, 0, -1}
    rows: tuple           # (a, b) meaning a.x + b >= 0
    labels: tuple         # ("dom", i) or (layer, j)
    point: tuple          # strictly interior witness

    def polyhedron(self, d) -> Polyhedron:
        return Polyhedron(self.rows, (), d)


@dataclass
class Region:
    index: int
    signs: tuple
    rows: tuple
    labels: tuple
    point: tuple
    piece: AffinePiece
    maps: list            # per hidden layer (M, c): preactivation maps valid on the region

    @property
    def active(self):
        return active_sets(self.signs)

    def contains(self, x) -> bool:
        return all(dot(a, x) + b >= 0 for a, b in self.rows)

    def polyhedron(self, d) -> Polyhedron:
        return Polyhedron(self.rows, (), d)

    def preactivation(self, l, j):
        M, c = self.maps[l - 1]
        return M[j], c[j]


@dataclass
class Facet:
    index: int
    regions: tuple        # (P, Q): canonical normal points into P
    hyperplane: tuple     # canonical (normal, offset)
    point: tuple          # relative-interior point
    signs: tuple
    neurons: tuple        # incident (layer, j)
    poly: Polyhedron      # H-description
    box_clipped: bool = False


@dataclass
class Ridge:
    index: int
    point: tuple
    regions: tuple
    facets: tuple
    neurons: tuple
    signs: tuple


@dataclass
class CanonicalComplex:
    net: Network
    domain: Polyhedron
    regions: list
    facets: list
    ridges: list
    stages: list          # cells of C_1, ..., C_L
    degenerate: list      # (signs, neuron) where a preactivation is identically zero
    lp_calls: int = 0
    warnings: list = field(default_factory=list)

    @property
    def dim(self) -> int:
        return self.domain.dim

    def region_at(self, x):
        return [r.index for r in self.regions if r.contains(x)]

    def facets_of_region(self, i):
        return [f for f in self.facets if i in f.regions]

    def summary(self) -> dict:
        return {
            "regions": len(self.regions),
            "facets": len(self.facets),
            "ridges": len(self.ridges),
            "box_clipped_facets": sum(f.box_clipped for f in self.facets),
            "degenerate": len(self.degenerate),
            "lp_calls": self.lp_calls,
        }


def _sign(v):
    return (v > 0) - (v < 0)


def _split(cell: Cell, M, c, layer, d, order, degenerate):
    """Split a cell by the zero sets of the affine maps x -> M[j].x + c[j]."""
    n = len(M)
    parts = [(dict(), cell.rows, cell.labels, cell.point)]
    for j in order:
        a, b = M[j], c[j]
        if is_zero(a):
            s = _sign(b)
            if s == 0:
                degenerate.append((cell.signs, (layer, j)))
            for p in parts:
                p[0][j] = s
            continue
        nxt = []
        for signs, rows, labels, x in parts:
            val = dot(a, x) + b
            for s in (1, -1):
                row = (tuple(s * v for v in a), s * b)
                new_rows = rows + (row,)
                if s * val > 0:
                    y = x
                else:
                    r = max_slack(Polyhedron(new_rows, (), d))
                    if r is None or r[0] <= 0:
                        continue
                    y = r[1]
                sg = dict(signs)
                sg[j] = s
                nxt.append((sg, new_rows, labels + ((layer, j),), y))
        parts = nxt
    out = []
    for signs, rows, labels, x in parts:
        out.append(Cell(cell.signs + (tuple(signs[j] for j in range(n)),), rows, labels, x))
    return out


def enumerate_regions(net: Network, box=DEFAULT_BOX, domain: Polyhedron | None = None, seed=None):
    """Regions of the canonical complex meeting the domain (default the box [-R, R]^d).

    Returns (regions, stages, degenerate).  seed shuffles the processing order,
    which must not change the result.
    """
    d = net.input_dim
    if domain is None:
        domain = Polyhedron.box(d, box)
    rng = random.Random(seed) if seed is not None else None
    start = max_slack(domain)
    if start is None or start[0] <= 0:
        raise ComplexError("domain is not full-dimensional")
    cells = [Cell((), domain.ineqs, tuple(("dom", i) for i in range(len(domain.ineqs))), start[1])]
    stages = []
    degenerate = []
    for l in range(1, net.depth + 1):
        new = []
        todo = list(cells)
        if rng:
            rng.shuffle(todo)
        for cell in todo:
            M, c = layer_maps(net, active_sets(cell.signs))[l - 1]
            order = list(range(net.architecture[l]))
            if rng:
                rng.shuffle(order)
            new.extend(_split(cell, M, c, l, d, order, degenerate))
        cells = sorted(new, key=lambda cl: cl.signs)
        stages.append(cells)
    regions = []
    for i, cell in enumerate(cells):
        S = active_sets(cell.signs)
        maps = layer_maps(net, S)
        piece = AffinePiece(*maps[-1])
        regions.append(Region(i, cell.signs, cell.rows, cell.labels, cell.point, piece, maps[:-1]))
    return regions, stages, degenerate


def _pattern_at(regions, x, net):
    f = net.forward(x)
    return tuple(tuple(_sign(v) for v in z) for z in f.pre)


def _facet_neurons(net, P: Region, Q: Region, signs):
    out = []
    for l, layer in enumerate(signs, start=1):
        for j, s in enumerate(layer):
            if s != 0:
                continue
            if not is_zero(P.preactivation(l, j)[0]) or not is_zero(Q.preactivation(l, j)[0]):
                out.append((l, j))
    return tuple(out)


def facets_and_ridges(net: Network, regions: list, domain: Polyhedron):
    d = domain.dim
    dom_rows = domain.ineqs
    facets: dict = {}
    by_region: dict = {r.index: [] for r in regions}   # region -> [(row index, facet index)]
    clipped = set()

    def on_boundary(x):
        return any(dot(a, x) + b == 0 for a, b in dom_rows)

    for P in regions:
        seen_planes = {facets_by_idx.hyperplane for facets_by_idx in
                       (fl for fl in facets.values() if P.index in fl.regions)}
        for k, lab in enumerate(P.labels):
            if lab[0] == "dom":
                continue
            a, b = P.rows[k]
            hp = canonical_hyperplane(a, b)
            if hp in seen_planes:
                # already known from the neighbour's side or a duplicate row
                for fl in facets.values():
                    if P.index in fl.regions and fl.hyperplane == hp:
                        by_region[P.index].append((k, fl.index))
                continue
            rest = P.rows[:k] + P.rows[k + 1:]
            F = Polyhedron(rest, ((a, b),), d)
            hull = affine_hull(F)
            if hull.dim != d - 1:
                continue
            x = hull.point
            if on_boundary(x):
                continue
            others = [R for R in regions if R.index != P.index and R.contains(x)]
            if len(others) != 1:
                raise ComplexError(f"facet of region {P.index} has {len(others)} neighbours")
            Q = others[0]
            n, off = hp
            first, second = (P, Q) if dot(n, P.point) + off > 0 else (Q, P)
            signs = _pattern_at(regions, x, net)
            key = frozenset((P.index, Q.index))
            if key in facets:
                raise ComplexError("two facets between the same pair of regions")
            fl = Facet(len(facets), (first.index, second.index), hp, x, signs,
                       _facet_neurons(net, P, Q, signs), F)
            facets[key] = fl
            seen_planes.add(hp)
            by_region[P.index].append((k, fl.index))
    facet_list = sorted(facets.values(), key=lambda f: f.index)
    # rows that bound each region, for ridge search
    for P in regions:
        mine = {}
        for k, fi in by_region[P.index]:
            mine.setdefault(fi, k)
        for fl in facet_list:
            if P.index in fl.regions and fl.index not in mine:
                for k, lab in enumerate(P.labels):
                    if lab[0] != "dom" and canonical_hyperplane(*P.rows[k]) == fl.hyperplane:
                        mine[fl.index] = k
                        break
        by_region[P.index] = sorted((k, fi) for fi, k in mine.items())

    ridges: dict = {}
    for P in regions:
        frows = by_region[P.index]
        bound_rows = [k for k, lab in enumerate(P.labels) if lab[0] == "dom"]
        for (k1, f1), (k2, f2) in combinations(frows, 2):
            if f1 == f2:
                continue
            x = _codim2_point(P, k1, k2, d)
            if x is None:
                continue
            if on_boundary(x):
                continue
            star = tuple(sorted(R.index for R in regions if R.contains(x)))
            key = frozenset(star)
            if key in ridges:
                continue
            star_set = set(star)
            fs = tuple(f.index for f in facet_list if set(f.regions) <= star_set)
            neurons = tuple(sorted({nn for fi in fs for nn in facet_list[fi].neurons}))
            ridges[key] = Ridge(len(ridges), x, star, fs, neurons, _pattern_at(regions, x, net))
        for k, fi in frows:
            if fi in clipped:
                continue
            a, b = P.rows[k]
            for kb in bound_rows:
                if _touches(P, k, kb, d):
                    clipped.add(fi)
                    break
    for fi in clipped:
        facet_list[fi].box_clipped = True
    ridge_list = sorted(ridges.values(), key=lambda r: r.index)
    return facet_list, ridge_list


def _codim2_point(P: Region, k1, k2, d):
    a1, b1 = P.rows[k1]
    a2, b2 = P.rows[k2]
    if exact_rank([a1, a2]) < 2:
        return None
    if d == 2:
        x = solve_unique([a1, a2], [-b1, -b2])
        if x is None or not P.contains(x):
            return None
        return x
    rest = tuple(r for i, r in enumerate(P.rows) if i not in (k1, k2))
    hull = affine_hull(Polyhedron(rest, ((a1, b1), (a2, b2)), d))
    if hull.dim != d - 2:
        return None
    return hull.point


def _touches(P: Region, k, kb, d):
    a1, b1 = P.rows[k]
    a2, b2 = P.rows[kb]
    if d == 2:
        if exact_rank([a1, a2]) < 2:
            return False
        x = solve_unique([a1, a2], [-b1, -b2])
        return x is not None and P.contains(x)
    rest = tuple(r for i, r in enumerate(P.rows) if i not in (k, kb))
    return lp_feasible(Polyhedron(rest, ((a1, b1), (a2, b2)), d)) is not None


def build_complex(net: Network, box=DEFAULT_BOX, domain: Polyhedron | None = None, seed=None) -> CanonicalComplex:
    before = LPStats.calls
    d = net.input_dim
    if domain is None:
        domain = Polyhedron.box(d, box)
    regions, stages, degenerate = enumerate_regions(net, box, domain, seed)
    facets, ridges = facets_and_ridges(net, regions, domain)
    cx = CanonicalComplex(net, domain, regions, facets, ridges, stages, degenerate)
    cx.lp_calls = LPStats.calls - before
    if any(f.box_clipped for f in facets):
        cx.warnings.append("some facets reach the working-box boundary; faces outside the box are not analysed")
    if degenerate:
        cx.warnings.append("some preactivations vanish identically on a region")
    return cx


def local_complex(net: Network, P: Polyhedron, seed=None) -> CanonicalComplex:
    """The canonical complex restricted to a full-dimensional polytope P."""
    return build_complex(net, domain=P, seed=seed)


def bent_hyperplane(cx: CanonicalComplex, neuron) -> list:
    neuron = tuple(neuron)
    return [f.index for f in cx.facets if neuron in f.neurons]


def complex_to_json(cx: CanonicalComplex) -> dict:
    from .linalg import fmt_rational as q

    def vecs(v):
        return [q(x) for x in v]

    def rows(rs):
        return [{"a": vecs(a), "b": q(b)} for a, b in rs]

    return {
        "dimension": cx.dim,
        "domain": rows(cx.domain.ineqs),
        "regions": [
            {"id": r.index, "signs": [list(s) for s in r.signs], "rows": rows(r.rows),
             "point": vecs(r.point), "A": [vecs(row) for row in r.piece.A], "b": vecs(r.piece.b)}
            for r in cx.regions
        ],
        "facets": [
            {"id": f.index, "regions": list(f.regions), "normal": vecs(f.hyperplane[0]),
             "offset": q(f.hyperplane[1]), "point": vecs(f.point), "signs": [list(s) for s in f.signs],
             "neurons": [list(n) for n in f.neurons], "box_clipped": f.box_clipped}
            for f in cx.facets
        ],
        "ridges": [
            {"id": r.index, "point": vecs(r.point), "regions": list(r.regions), "facets": list(r.facets),
             "neurons": [list(n) for n in r.neurons]}
            for r in cx.ridges
        ],
        "summary": cx.summary(),
    }
