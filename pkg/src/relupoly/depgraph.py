"""Bending ridges, candidate bent hyperplanes and the dependency graph."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations

from scipy.cluster.hierarchy import DisjointSet

from .tropical import BreakpointComplex

BENDING = "bending"
NON_BENDING = "non-bending"
IRREGULAR = "irregular"


@dataclass
class RidgeClass:
    ridge: int
    kind: str
    count: int
    earlier: tuple = ()
    later: tuple = ()
    note: str = ""


def _opposite_pairs(bc: BreakpointComplex, star):
    facets = bc.cx.facets
    pairs = []
    for a, b in combinations(star, 2):
        if facets[a].hyperplane == facets[b].hyperplane:
            pairs.append((a, b))
    return pairs


def classify_ridge(bc: BreakpointComplex, ridge: int) -> RidgeClass:
    cx = bc.cx
    star = bc.star(ridge)
    w = bc.weights
    pairs = _opposite_pairs(bc, star)
    partner = {}
    for a, b in pairs:
        partner.setdefault(a, []).append(b)
        partner.setdefault(b, []).append(a)
    non_bending = all(any(w[s].w == w[t].w for t in partner.get(s, [])) for s in star)
    if non_bending:
        return RidgeClass(ridge, NON_BENDING, len(star))
    if len(star) == 4:
        if len(pairs) != 1:
            return RidgeClass(ridge, IRREGULAR, 4, note=f"{len(pairs)} opposite pairs")
        earlier = tuple(sorted(pairs[0]))
    elif len(star) == 3:
        flat = []
        for s in star:
            P, Q = cx.facets[s].regions
            if not cx.regions[P].piece.is_constant() and not cx.regions[Q].piece.is_constant():
                flat.append(s)
        if len(flat) != 1:
            return RidgeClass(ridge, IRREGULAR, 3, note="no unique facet between non-constant regions")
        earlier = (flat[0],)
    else:
        return RidgeClass(ridge, IRREGULAR, len(star), note="non-supertransversal input")
    later = tuple(sorted(s for s in star if s not in earlier))
    return RidgeClass(ridge, BENDING, len(star), earlier, later)


@dataclass
class DependencyGraph:
    vertices: list                 # frozensets of facet indices
    facet_class: dict              # facet index -> vertex index
    edges: dict                    # (u, v) -> ridge indices
    ridge_classes: list
    irregular: list = field(default_factory=list)

    def successors(self, u):
        return sorted(v for (a, v) in self.edges if a == u)

    def edge_set(self):
        return set(self.edges)


def candidate_bent_hyperplanes(bc: BreakpointComplex, classes=None, order=None):
    """Union-find over breakpoint facets; returns (classes, facet -> class id, ridge classes)."""
    if classes is None:
        ridges = list(bc.ridges) if order is None else list(order)
        classes = [classify_ridge(bc, r) for r in ridges]
    w = bc.weights
    ds = DisjointSet(bc.facets)
    for rc in classes:
        star = bc.star(rc.ridge)
        if rc.kind == NON_BENDING:
            for a, b in _opposite_pairs(bc, star):
                if w[a].w == w[b].w:
                    ds.merge(a, b)
        elif rc.kind == BENDING:
            for group in (rc.earlier, rc.later):
                for a, b in zip(group, group[1:]):
                    ds.merge(a, b)
    subsets = sorted((sorted(s) for s in ds.subsets()), key=lambda s: s[0])
    groups = [frozenset(s) for s in subsets]
    facet_class = {f: i for i, g in enumerate(groups) for f in g}
    return groups, facet_class, classes


def dependency_graph(bc: BreakpointComplex, order=None) -> DependencyGraph:
    groups, facet_class, classes = candidate_bent_hyperplanes(bc, order=order)
    edges: dict = {}
    irregular = []
    for rc in sorted(classes, key=lambda r: r.ridge):
        if rc.kind == IRREGULAR:
            irregular.append(rc.ridge)
            continue
        if rc.kind != BENDING:
            continue
        u = facet_class[rc.earlier[0]]
        v = facet_class[rc.later[0]]
        if u == v:
            continue
        edges.setdefault((u, v), []).append(rc.ridge)
    return DependencyGraph(groups, facet_class, edges, sorted(classes, key=lambda r: r.ridge), irregular)


def layered_subgraph_check(G: DependencyGraph, arch):
    """Find disjoint vertex sets V_1..V_L of sizes arch[1..L] with all edges V_l -> V_{l+1} present.

    Returns the layers found, or None.
    """
    widths = tuple(arch[1:-1])
    E = G.edge_set()
    nv = len(G.vertices)

    @lru_cache(maxsize=None)
    def extend(l, current, used):
        if l == len(widths):
            return ()
        pool = [v for v in range(nv) if v not in used and all((u, v) in E for u in current)]
        for chosen in combinations(pool, widths[l]):
            rest = extend(l + 1, frozenset(chosen), used | frozenset(chosen))
            if rest is not None:
                return (chosen,) + rest
        return None

    return extend(0, frozenset(), frozenset())


def longest_chain(G: DependencyGraph):
    """A longest directed path (as a vertex list); raises on a cycle."""
    succ = {u: G.successors(u) for u in range(len(G.vertices))}
    state = {}
    best = {}

    def visit(u):
        if state.get(u) == 1:
            raise ValueError("dependency graph has a cycle")
        if state.get(u) == 2:
            return best[u]
        state[u] = 1
        path = [u]
        for v in succ[u]:
            p = visit(v)
            if len(p) + 1 > len(path):
                path = [u] + p
        state[u] = 2
        best[u] = path
        return path

    out = []
    for u in range(len(G.vertices)):
        p = visit(u)
        if len(p) > len(out):
            out = p
    return out


def depth_certificate(G: DependencyGraph, depth: int):
    """("reject", chain) if a chain has more than `depth` vertices, else ("accept", chain)."""
    chain = longest_chain(G)
    return ("reject" if len(chain) > depth else "accept"), chain


def ground_truth_layers(bc: BreakpointComplex, G: DependencyGraph) -> dict:
    """Vertex -> set of neurons incident to its facets."""
    return {i: sorted({n for f in g for n in bc.cx.facets[f].neurons}) for i, g in enumerate(G.vertices)}


def to_dot(G: DependencyGraph, labels: dict | None = None) -> str:
    lines = ["digraph dependency {", "  rankdir=LR;"]
    for i, g in enumerate(G.vertices):
        extra = ""
        if labels and i in labels:
            extra = "\\n" + ", ".join(f"({l},{j})" for l, j in labels[i])
        lines.append(f'  v{i} [label="v{i} ({len(g)} facets){extra}"];')
    for (u, v), rs in sorted(G.edges.items()):
        lines.append(f'  v{u} -> v{v} [label="{",".join(map(str, rs))}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
