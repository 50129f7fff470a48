"""Discrete fiber configurations and their polynomial systems."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .depgraph import DependencyGraph
from .linalg import fmt_rational, norm2
from .net import Network
from .tropical import BreakpointComplex


# polynomials over Q

class Poly:
    """Sparse polynomial: monomial (sorted tuple of (var, exp)) -> Fraction."""
    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {m: c for m, c in (terms or {}).items() if c != 0}

    @staticmethod
    def const(c):
        return Poly({(): Fraction(c)})

    @staticmethod
    def var(name):
        return Poly({((name, 1),): Fraction(1)})

    def __add__(self, other):
        other = other if isinstance(other, Poly) else Poly.const(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, Fraction(0)) + c
        return Poly(out)

    __radd__ = __add__

    def __neg__(self):
        return Poly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other if isinstance(other, Poly) else Poly.const(-Fraction(other)))

    def __mul__(self, other):
        if not isinstance(other, Poly):
            other = Fraction(other)
            return Poly({m: c * other for m, c in self.terms.items()})
        out: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                exps = dict(m1)
                for v, e in m2:
                    exps[v] = exps.get(v, 0) + e
                m = tuple(sorted(exps.items()))
                out[m] = out.get(m, Fraction(0)) + c1 * c2
        return Poly(out)

    __rmul__ = __mul__

    def is_zero(self):
        return not self.terms

    def degree(self):
        return max((sum(e for _, e in m) for m in self.terms), default=0)

    def variables(self):
        return {v for m in self.terms for v, _ in m}

    def evaluate(self, values: dict) -> Fraction:
        total = Fraction(0)
        for m, c in self.terms.items():
            t = c
            for v, e in m:
                t *= values[v] ** e
            total += t
        return total

    def to_json(self):
        return [[fmt_rational(c), [[v, e] for v, e in m]] for m, c in sorted(self.terms.items())]

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for m, c in sorted(self.terms.items()):
            mono = "*".join(v if e == 1 else f"{v}^{e}" for v, e in m)
            if not mono:
                parts.append(fmt_rational(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{fmt_rational(c)}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")


def w_name(l, i, j):
    return f"W[{l}][{i}][{j}]"


def b_name(l, i):
    return f"b[{l}][{i}]"


def mu_name(sigma):
    return f"mu[{sigma}]"


def parameter_values(net: Network) -> dict:
    vals = {}
    for l, (W, b) in enumerate(zip(net.weights, net.biases), start=1):
        for i, row in enumerate(W):
            for j, v in enumerate(row):
                vals[w_name(l, i, j)] = v
            vals[b_name(l, i)] = b[i]
    return vals


# configurations

@dataclass
class Configuration:
    phi: dict                     # candidate vertex -> (layer, neuron)
    signs: dict = field(default_factory=dict)   # facet -> sign pattern (tuple of tuples)

    def to_json(self):
        return {"phi": {str(v): list(n) for v, n in sorted(self.phi.items())},
                "signs": {str(f): [list(s) for s in p] for f, p in sorted(self.signs.items())}}


def respects_order(G: DependencyGraph, phi: dict) -> bool:
    return all(phi[u][0] < phi[v][0] for (u, v) in G.edges if u in phi and v in phi)


def enumerate_configurations(G: DependencyGraph, arch, cap=1000):
    """Order-respecting injective maps vertices -> hidden neurons, up to within-layer permutations.

    Returns (list of phi dicts, truncated flag).
    """
    widths = list(arch[1:-1])
    nv = len(G.vertices)
    preds = {v: [u for (u, w) in G.edges if w == v] for v in range(nv)}
    succs = {u: [w for (x, w) in G.edges if x == u] for u in range(nv)}
    out = []
    truncated = False
    layer_of = {}
    used = [0] * len(widths)

    def rec(v):
        nonlocal truncated
        if len(out) >= cap:
            truncated = True
            return
        if v == nv:
            counters = [0] * len(widths)
            phi = {}
            for u in range(nv):
                l = layer_of[u]
                phi[u] = (l, counters[l - 1])
                counters[l - 1] += 1
            out.append(phi)
            return
        for l in range(1, len(widths) + 1):
            if used[l - 1] >= widths[l - 1]:
                continue
            if any(u in layer_of and layer_of[u] >= l for u in preds[v]):
                continue
            if any(w in layer_of and layer_of[w] <= l for w in succs[v]):
                continue
            layer_of[v] = l
            used[l - 1] += 1
            rec(v + 1)
            used[l - 1] -= 1
            del layer_of[v]
            if truncated:
                return

    rec(0)
    return out, truncated


def ground_truth_configuration(bc: BreakpointComplex, G: DependencyGraph) -> Configuration:
    cx = bc.cx
    phi = {}
    for v, facets in enumerate(G.vertices):
        neurons = {n for f in facets for n in cx.facets[f].neurons}
        if len(neurons) != 1:
            raise ValueError(f"candidate {v} spans neurons {sorted(neurons)}")
        phi[v] = next(iter(neurons))
    signs = {f: cx.facets[f].signs for f in bc.facets}
    return Configuration(phi, signs)


# emission

@dataclass
class FacetData:
    normal: tuple          # primitive normal a
    offset: Fraction       # beta
    weight: tuple          # unnormalized weight w = (A_P - A_Q) a
    norm2: Fraction        # |a|^2

    def to_json(self):
        f = fmt_rational
        return {"normal": [f(v) for v in self.normal], "offset": f(self.offset),
                "weight": [f(v) for v in self.weight], "norm2": f(self.norm2)}


def breakpoint_data(bc: BreakpointComplex) -> dict:
    out = {}
    for sigma in bc.facets:
        fw = bc.weights[sigma]
        n, off = bc.cx.facets[sigma].hyperplane
        out[sigma] = FacetData(tuple(n), off, tuple(fw.w), norm2(n))
    return out


@dataclass
class Constraint:
    kind: str              # alignment | offset | weight
    facet: int
    index: int
    poly: Poly

    def to_json(self):
        return {"kind": self.kind, "facet": self.facet, "index": self.index, "terms": self.poly.to_json()}


@dataclass
class ConfigurationSystem:
    arch: tuple
    variables: list
    data: dict
    constraints: list
    nonzero: list

    def counts(self):
        out = {}
        for c in self.constraints:
            out[c.kind] = out.get(c.kind, 0) + 1
        out["nonzero"] = len(self.nonzero)
        return out

    def to_json(self):
        return {"arch": list(self.arch), "variables": self.variables,
                "data": {str(k): v.to_json() for k, v in sorted(self.data.items())},
                "constraints": [c.to_json() for c in self.constraints],
                "nonzero": self.nonzero}

    def to_text(self):
        lines = [f"# architecture {','.join(map(str, self.arch))}; {len(self.variables)} variables"]
        for c in self.constraints:
            lines.append(f"[{c.kind} facet {c.facet} #{c.index}] {c.poly} = 0")
        for v in self.nonzero:
            lines.append(f"[nonzero] {v} != 0")
        return "\n".join(lines) + "\n"

    def evaluate(self, values: dict) -> list:
        """Indices of constraints that do not vanish at the given assignment."""
        bad = [i for i, c in enumerate(self.constraints) if c.poly.evaluate(values) != 0]
        bad += [("nonzero", v) for v in self.nonzero if values[v] == 0]
        return bad


def _symbolic_layers(arch):
    Ws, bs = [], []
    for l in range(1, len(arch)):
        Ws.append([[Poly.var(w_name(l, i, j)) for j in range(arch[l - 1])] for i in range(arch[l])])
        bs.append([Poly.var(b_name(l, i)) for i in range(arch[l])])
    return Ws, bs


def _neuron_map(Ws, bs, signs, l, i):
    """Preactivation of neuron (l, i) as (gradient, offset) under the sign pattern."""
    d = len(Ws[0][0])
    rows = [list(r) for r in Ws[0]]
    offs = list(bs[0])
    for k in range(1, l):
        S = [j for j, s in enumerate(signs[k - 1]) if s > 0]
        W, b = Ws[k], bs[k]
        rows, offs = ([[sum((W[r][j] * rows[j][t] for j in S), Poly()) for t in range(d)] for r in range(len(W))],
                      [sum((W[r][j] * offs[j] for j in S), Poly()) + b[r] for r in range(len(W))])
    return rows[i], offs[i]


def _forward_vector(Ws, signs, l, i):
    """W^{L+1} D_{S_L} ... D_{S_{l+1}} W^{l+1} e_i."""
    v = [Poly.const(int(r == i)) for r in range(len(Ws[l - 1]))]
    for k in range(l, len(Ws)):
        keep = range(len(v)) if k == l else [j for j, s in enumerate(signs[k - 1]) if s > 0]
        v = [sum((Ws[k][r][j] * v[j] for j in keep), Poly()) for r in range(len(Ws[k]))]
    return v


def emit_configuration_system(bc: BreakpointComplex, G: DependencyGraph, config: Configuration, arch,
                              data: dict | None = None) -> ConfigurationSystem:
    arch = tuple(arch)
    if not respects_order(G, config.phi):
        raise ValueError("configuration violates the dependency order")
    data = data or breakpoint_data(bc)
    Ws, bs = _symbolic_layers(arch)
    m = arch[-1]
    constraints, nonzero = [], []
    for v, facets in enumerate(G.vertices):
        if v not in config.phi:
            raise ValueError(f"candidate {v} has no neuron")
        l, i = config.phi[v]
        for sigma in sorted(facets):
            if sigma not in data:
                raise ValueError(f"facet {sigma} lacks weight data")
            if sigma not in config.signs:
                raise ValueError(f"facet {sigma} has no sign pattern")
            fd = data[sigma]
            signs = config.signs[sigma]
            mu = Poly.var(mu_name(sigma))
            g, t = _neuron_map(Ws, bs, signs, l, i)
            for k in range(len(g)):
                constraints.append(Constraint("alignment", sigma, k, g[k] - mu * fd.normal[k]))
            constraints.append(Constraint("offset", sigma, 0, t - mu * fd.offset))
            vvec = _forward_vector(Ws, signs, l, i)
            n4 = fd.norm2 * fd.norm2
            for k in range(m):
                constraints.append(Constraint("weight", sigma, k, mu * mu * vvec[k] * vvec[k] * n4 - fd.weight[k] ** 2))
            nonzero.append(mu_name(sigma))
    variables = sorted({x for c in constraints for x in c.poly.variables()} | set(nonzero))
    return ConfigurationSystem(arch, variables, data, constraints, nonzero)


def _numeric_layers(net: Network):
    Ws = [[[Poly.const(v) for v in r] for r in W] for W in net.weights]
    bs = [[Poly.const(v) for v in b] for b in net.biases]
    return Ws, bs


def _value(p: Poly) -> Fraction:
    return p.evaluate({})


def solve_mu(eta: Network, G: DependencyGraph, config: Configuration, data: dict):
    """mu per facet from the alignment rows (one division, cross-checked), or None if inconsistent."""
    Ws, bs = _numeric_layers(eta)
    mus = {}
    for v, facets in enumerate(G.vertices):
        l, i = config.phi[v]
        for sigma in facets:
            fd = data[sigma]
            g, t = _neuron_map(Ws, bs, config.signs[sigma], l, i)
            g = [_value(x) for x in g]
            t = _value(t)
            k = next(j for j, a in enumerate(fd.normal) if a != 0)
            mu = g[k] / fd.normal[k]
            if mu == 0 or any(gj != mu * a for gj, a in zip(g, fd.normal)) or t != mu * fd.offset:
                return None
            mus[sigma] = mu
    return mus


def verify_membership(eta: Network, G: DependencyGraph, config: Configuration, data: dict) -> bool:
    """True iff eta with suitable mu satisfies every alignment, offset and weight equation."""
    if not respects_order(G, config.phi):
        return False
    try:
        mus = solve_mu(eta, G, config, data)
    except (IndexError, KeyError):
        return False
    if mus is None:
        return False
    Ws, _ = _numeric_layers(eta)
    m = eta.output_dim
    for v, facets in enumerate(G.vertices):
        l, i = config.phi[v]
        for sigma in facets:
            fd = data[sigma]
            vvec = [_value(x) for x in _forward_vector(Ws, config.signs[sigma], l, i)]
            mu = mus[sigma]
            for k in range(m):
                if mu * mu * vvec[k] * vvec[k] * fd.norm2 * fd.norm2 != fd.weight[k] ** 2:
                    return False
    return True


def membership_by_substitution(system: ConfigurationSystem, eta: Network, G, config, data) -> bool:
    """Second route: substitute eta and the solved mu into the emitted polynomials."""
    mus = solve_mu(eta, G, config, data)
    if mus is None:
        return False
    values = parameter_values(eta)
    values.update({mu_name(s): mu for s, mu in mus.items()})
    return not system.evaluate(values)
