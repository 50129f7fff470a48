"""Explicit parameter constructions: slab layers, pivots, identifiable and minimal non-identifiable builds."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .arrangement import vertices
from .complex import build_complex, enumerate_regions
from .linalg import (canonical_hyperplane, dot, exact_rank, fmt_rational, inverse, is_zero, mat_mul, mat_vec,
                     nullspace, primitive, rref, vec)
from .lp import OPTIMAL, Polyhedron, affine_hull, maximize, max_slack
from .net import Network, active_sets

DENOM = 2 ** 16
NUDGE_DRAWS = 8
MAX_HALVINGS = 20
MAX_OUTPUT_RESAMPLES = 50


class ConstructionError(RuntimeError):
    def __init__(self, message, trail=None):
        super().__init__(message)
        self.trail = trail


def random_rational(rng: random.Random, lo=-1, hi=1, den=DENOM) -> Fraction:
    return Fraction(rng.randint(int(lo * den), int(hi * den)), den)


def _nonzero_rational(rng, lo=-1, hi=1):
    while True:
        q = random_rational(rng, lo, hi)
        if q != 0:
            return q


# affine bookkeeping in input space

@dataclass(frozen=True)
class Affine:
    """x -> A x + c."""
    A: tuple
    c: tuple

    @staticmethod
    def identity(d):
        return Affine(tuple(tuple(Fraction(int(i == j)) for j in range(d)) for i in range(d)),
                      tuple(Fraction(0) for _ in range(d)))

    def then(self, W, b, S=None) -> "Affine":
        """Compose with the layer y -> D_S (W y + b); S=None keeps every coordinate."""
        A = mat_mul(W, self.A)
        c = tuple(v + bb for v, bb in zip(mat_vec(W, self.c), b))
        if S is not None:
            zero = tuple(Fraction(0) for _ in self.A[0])
            A = tuple(r if j in S else zero for j, r in enumerate(A))
            c = tuple(v if j in S else Fraction(0) for j, v in enumerate(c))
        return Affine(A, c)

    def pull(self, a, beta):
        """The functional x -> a . (A x + c) + beta as a row (normal, offset)."""
        n = tuple(sum(ai * r[k] for ai, r in zip(a, self.A)) for k in range(len(self.A[0])))
        return n, dot(a, self.c) + beta


def _range(P: Polyhedron, row):
    n, off = row
    hi = maximize(P, n)
    lo = maximize(P, tuple(-v for v in n))
    if hi.status != OPTIMAL or lo.status != OPTIMAL:
        raise ConstructionError("polytope is empty or unbounded")
    return -lo.value + off, hi.value + off


def _forward_prefix(Ws, bs, x):
    a = vec(x)
    pres, posts = [], []
    for W, b in zip(Ws, bs):
        z = tuple(dot(r, a) + c for r, c in zip(W, b))
        pres.append(z)
        a = tuple(v if v > 0 else Fraction(0) for v in z)
        posts.append(a)
    return pres, posts


def _unit_row(row, b):
    """Positive rescaling with max |w_i| = 1 (keeps later layers at the scale of the box)."""
    s = max(abs(v) for v in row)
    return tuple(v / s for v in row), b / s


def _center(P: Polyhedron):
    """Vertex average for small dimension (a well-centred relint point), else an LP relint point."""
    if P.dim <= 3:
        vs = vertices(P)
        if len(vs) > P.dim - len(P.eqs):
            return tuple(sum(v[i] for v in vs) / len(vs) for i in range(P.dim))
    return affine_hull(P).point


# slab layers

@dataclass
class SlabLayer:
    W: tuple
    b: tuple
    P: Polyhedron                 # polytope in input space
    T: Affine                     # input space -> layer input space on P
    H: tuple                      # (a, beta) in layer input space
    eps: Fraction
    levels: tuple                 # s_1 < ... < s_n, H_k = {a.y + beta = s_k} before the nudge
    orientation: list             # S(R_i) observed at certificate points
    certificate_points: list
    nudge: Fraction = Fraction(0)

    @property
    def n(self):
        return len(self.W)

    def hyperplanes(self):
        """Input-space rows of the slab hyperplanes on P."""
        return [self.T.pull(w, c) for w, c in zip(self.W, self.b)]


def oriented_pattern(n, i):
    """S(R_i) = {1..i} symmetric difference {n}, 0-based."""
    return frozenset(range(i)) ^ {n - 1}


def _extent(cells, u):
    """max |u . y| over the union of cells, each a polytope with its affine map to y."""
    best = Fraction(0)
    for P, T in cells:
        lo, hi = _range(P, T.pull(u, Fraction(0)))
        best = max(best, -lo, hi)
    return best


def make_slab_layer(P: Polyhedron, H, n: int, eps, X=None, rng=None, T: Affine | None = None,
                    nudge=True) -> SlabLayer:
    """Oriented slab layer of n neurons on P, eps-close to H and transparent on X.

    X is a list of (polytope, affine map) pairs whose images cover the transparency set;
    it defaults to P itself.
    """
    if n < 2:
        raise ValueError("a slab layer needs at least two neurons")
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    rng = rng or random.Random(0)
    T = T or Affine.identity(P.dim)
    X = X if X is not None else [(P, T)]
    a, beta = vec(H[0]), Fraction(H[1])
    p = len(a)
    amax = max(abs(v) for v in a)
    lo, hi = _range(P, T.pull(a, beta))
    if not lo < 0 < hi:
        raise ConstructionError("hyperplane is not inside the polytope")
    for _ in range(MAX_HALVINGS + 1):
        levels = tuple(eps * amax * (2 * k - n - 1) / (2 * (n - 1)) for k in range(1, n + 1))
        if lo < levels[0] and levels[-1] < hi:
            break
        eps /= 2
    else:
        raise ConstructionError("could not certify the slab hyperplanes inside the polytope")
    raw = [[random_rational(rng) for _ in range(p)] for _ in range(n)] if nudge else [[Fraction(0)] * p] * n
    u = tuple(x + y for x, y in zip(raw[0], raw[-1]))
    ext = _extent(X, u) if nudge else Fraction(0)
    # neurons 1 and n are both inactive only where (d_1 + d_n) . y < s_1 - s_n
    nu = min((levels[-1] - levels[0]) / (2 * ext), amax / 4) if ext > 0 else Fraction(0)
    for _ in range(MAX_HALVINGS + 1):
        rows, bias = [], []
        for k in range(n):
            delta = [nu * v for v in raw[k]]
            if k < n - 1:
                w = tuple(ai + di for ai, di in zip(a, delta))
                c = beta - levels[k]
            else:
                w = tuple(-ai + di for ai, di in zip(a, delta))
                c = levels[k] - beta
            rows.append(_unit_row(w, c))
        slab = SlabLayer(tuple(r for r, _ in rows), tuple(c for _, c in rows), P, T, (a, beta), eps, levels, [], [])
        slab.nudge = nu
        try:
            _certify_orientation(slab, lo, hi)
            _certify_disjoint(slab)
            return slab
        except ConstructionError:
            nu /= 2
    raise ConstructionError("could not certify the slab orientation")


def _certify_disjoint(slab: SlabLayer):
    rows = slab.hyperplanes()
    for i in range(len(rows)):
        for j in range(i + 1, len(rows)):
            res = maximize(slab.P.add(eqs=[rows[i], rows[j]]), [0] * slab.P.dim)
            if res.status == OPTIMAL:
                raise ConstructionError(f"slab hyperplanes {i} and {j} meet inside P")


def _certify_orientation(slab: SlabLayer, lo, hi):
    """One point per region R_0..R_n of P with the expected active set."""
    s = slab.levels
    n = slab.n
    targets = [(lo + s[0]) / 2] + [(s[i] + s[i + 1]) / 2 for i in range(n - 1)] + [(s[-1] + hi) / 2]
    g = slab.T.pull(*slab.H)
    for i, t in enumerate(targets):
        res = maximize(slab.P.add(eqs=[(g[0], g[1] - t)]), [0] * slab.P.dim)
        if res.status != OPTIMAL:
            raise ConstructionError("orientation certificate failed")
        x = res.x
        y = tuple(v + cc for v, cc in zip(mat_vec(slab.T.A, x), slab.T.c))
        z = [dot(w, y) + c for w, c in zip(slab.W, slab.b)]
        S = frozenset(j for j, v in enumerate(z) if v > 0)
        if S != oriented_pattern(n, i) or any(v == 0 for v in z):
            raise ConstructionError(f"region R_{i} has pattern {sorted(S)}")
        slab.orientation.append(sorted(S))
        slab.certificate_points.append(x)


def pivot_hyperplane(slab: SlabLayer, points=None):
    """Affine hull H' of the images of points x_k in relint(H_k cap P); returns (H', x_k, y_k)."""
    rows = slab.hyperplanes()
    xs = []
    if points is None:
        for r in rows:
            Q = slab.P.add(eqs=[r])
            if affine_hull(Q).dim != slab.P.dim - 1:
                raise ConstructionError("slab hyperplane is not inside P")
            xs.append(_center(Q))
    else:
        xs = [vec(x) for x in points]
    ys = []
    for x in xs:
        y = tuple(v + c for v, c in zip(mat_vec(slab.T.A, x), slab.T.c))
        z = tuple(dot(w, y) + c for w, c in zip(slab.W, slab.b))
        ys.append(tuple(v if v > 0 else Fraction(0) for v in z))
    ns = nullspace([list(y) + [Fraction(1)] for y in ys], len(ys[0]) + 1)
    if len(ns) != 1:
        raise ConstructionError("slab not generic: image points are affinely dependent")
    v, _ = primitive(ns[0])
    Hp = (v[:-1], v[-1])
    # on every slab region the pullback of H' must be a hyperplane transverse to the slab direction
    g = slab.T.pull(*slab.H)[0]
    for i in range(slab.n + 1):
        n_i, _ = slab.T.then(slab.W, slab.b, oriented_pattern(slab.n, i)).pull(*Hp)
        if is_zero(n_i) or exact_rank([n_i, g]) < 2:
            raise ConstructionError(f"slab not generic: H' pulls back degenerately on region R_{i}")
    return Hp, xs, ys


# identifiable construction

@dataclass
class Stage:
    layer: int
    polytope: Polyhedron          # P^(l-1): where layer l was built (input space)
    hyperplane: tuple             # H or H' in the layer input space
    eps: Fraction
    nudge: Fraction
    slack: Fraction
    pivot_points: list = field(default_factory=list)
    pivot_images: list = field(default_factory=list)

    def to_json(self):
        f = fmt_rational
        return {"layer": self.layer,
                "polytope": [[[f(v) for v in a], f(b)] for a, b in self.polytope.ineqs],
                "hyperplane": [[f(v) for v in self.hyperplane[0]], f(self.hyperplane[1])],
                "eps": f(self.eps), "nudge": f(self.nudge), "slack": f(self.slack),
                "pivot_points": [[f(v) for v in x] for x in self.pivot_points],
                "pivot_images": [[f(v) for v in y] for y in self.pivot_images]}


@dataclass
class ConstructionTrail:
    arch: tuple
    box: Fraction
    seed: int
    stages: list = field(default_factory=list)
    final_polytope: Polyhedron | None = None
    output_resamples: int = 0
    verdicts: list = field(default_factory=list)

    def polytopes(self):
        out = [(f"P{s.layer - 1}", s.polytope) for s in self.stages]
        if self.final_polytope is not None:
            out.append((f"P{len(self.stages)}", self.final_polytope))
        return out

    def to_json(self):
        f = fmt_rational
        d = {"arch": list(self.arch), "box": f(self.box), "seed": self.seed,
             "stages": [s.to_json() for s in self.stages], "output_resamples": self.output_resamples,
             "verdicts": [v.to_json() for v in self.verdicts]}
        if self.final_polytope is not None:
            d["final_polytope"] = [[[f(v) for v in a], f(b)] for a, b in self.final_polytope.ineqs]
        return d


def _check_arch(arch, min_last=2):
    arch = tuple(int(v) for v in arch)
    if len(arch) < 3:
        raise ValueError("need at least one hidden layer")
    if any(w < 2 for w in arch[1:-1]):
        raise ValueError("every hidden layer needs width at least 2 (width-1 layers cannot satisfy the intersection condition)")
    if arch[0] < 1 or arch[-1] < 1:
        raise ValueError("input and output widths must be positive")
    if arch[-2] < min_last:
        raise ValueError(f"last hidden layer needs width at least {min_last}")
    return arch


def _slack_for_pivot(slab: SlabLayer, Hp, T_next: Affine, P_next: Polyhedron, xs):
    """Margins of H' on P_next (through T_next) and along every H_k of the slab within its polytope."""
    a, beta = Hp
    amax = max(abs(v) for v in a)
    lo, hi = _range(P_next, T_next.pull(a, beta))
    margins = [min(-lo, hi)]
    for k, x in enumerate(xs):
        y = tuple(v + c for v, c in zip(mat_vec(slab.T.A, x), slab.T.c))
        S = frozenset(j for j, (w, c) in enumerate(zip(slab.W, slab.b)) if dot(w, y) + c > 0)
        T_k = slab.T.then(slab.W, slab.b, S)
        on_Hk = slab.P.add(eqs=[slab.hyperplanes()[k]])
        lo_k, hi_k = _range(on_Hk, T_k.pull(a, beta))
        margins.append(min(-lo_k, hi_k))
    m = min(margins)
    if m <= 0:
        raise ConstructionError("pivot hyperplane is not inside the slab regions")
    return m / amax


def _crossing_certificate(prev: SlabLayer, new: SlabLayer):
    """Every new hyperplane crosses every previous slab hyperplane inside relint of the previous polytope."""
    for k, hk in enumerate(prev.hyperplanes()):
        x0 = affine_hull(prev.P.add(eqs=[hk])).point
        y0 = tuple(v + c for v, c in zip(mat_vec(prev.T.A, x0), prev.T.c))
        S = frozenset(j for j, (w, c) in enumerate(zip(prev.W, prev.b)) if dot(w, y0) + c > 0)
        T_k = prev.T.then(prev.W, prev.b, S)
        for w, c in zip(new.W, new.b):
            row = T_k.pull(w, c)
            if is_zero(row[0]):
                return False
            Q = prev.P.add(eqs=[hk, row])
            r = max_slack(Q)
            if r is None or r[0] <= 0:
                return False
            if exact_rank([hk[0], row[0]]) != 2:
                return False
    return True


def _all_active(P: Polyhedron, T: Affine, W, b) -> Polyhedron:
    return P.add(ineqs=[T.pull(w, c) for w, c in zip(W, b)])


def _prefix_cells(Ws, bs, box, d):
    """Regions of the prefix network over the box with the affine map to the last post-activation."""
    if not Ws:
        return [(Polyhedron.box(d, box), Affine.identity(d))]
    prefix = Network(list(Ws) + [[[Fraction(0)] * len(Ws[-1])]], list(bs) + [[Fraction(0)]])
    regions, _, _ = enumerate_regions(prefix, box)
    cells = []
    for reg in regions:
        T = Affine.identity(d)
        for W, b, S in zip(Ws, bs, active_sets(reg.signs)):
            T = T.then(W, b, S)
        cells.append((reg.polyhedron(d), T))
    return cells


def _build_slabs(arch, box, rng, trail, widths, eps_fraction=Fraction(1, 2)):
    d = arch[0]
    R = Fraction(box)
    P = Polyhedron.box(d, R)
    T = Affine.identity(d)
    Ws, bs = [], []
    a = tuple(_nonzero_rational(rng, -1, 1) for _ in range(d))
    a, _ = primitive(a)
    H = (a, Fraction(0))
    slack = R * sum(abs(v) for v in a) / max(abs(v) for v in a)
    prev = None
    for l, n in enumerate(widths, start=1):
        X = _prefix_cells(Ws, bs, R, d)
        last = l == len(widths)
        eps = eps_fraction * slack
        best = None
        for _ in range(MAX_HALVINGS + 1):
            for _draw in range(NUDGE_DRAWS):
                try:
                    slab = make_slab_layer(P, H, n, eps, X, rng, T)
                except ConstructionError:
                    continue
                if prev is not None and not _crossing_certificate(prev, slab):
                    continue
                P_next = _all_active(P, T, slab.W, slab.b)
                T_next = T.then(slab.W, slab.b)
                if last:
                    best = (Fraction(0), slab, None)
                    break
                Hp, xs, ys = pivot_hyperplane(slab)
                try:
                    nxt = _slack_for_pivot(slab, Hp, T_next, P_next, xs)
                except ConstructionError:
                    continue
                if best is None or nxt > best[0]:
                    best = (nxt, slab, (Hp, xs, ys))
            if best is not None:
                break
            eps /= 2
        else:
            raise ConstructionError(f"layer {l}: no eps passed the slab certificates", trail)
        nxt, slab, piv = best
        stage = Stage(l, P, H, slab.eps, slab.nudge, slack)
        trail.stages.append(stage)
        Ws.append(slab.W)
        bs.append(slab.b)
        if piv is not None:
            H, stage.pivot_points, stage.pivot_images = piv
            slack = nxt
        P, T = _all_active(P, T, slab.W, slab.b), T.then(slab.W, slab.b)
        prev = slab
    trail.final_polytope = P
    return Ws, bs, prev


def _random_output(arch, rng):
    m, n = arch[-1], arch[-2]
    V = tuple(tuple(_nonzero_rational(rng) for _ in range(n)) for _ in range(m))
    c = tuple(random_rational(rng) for _ in range(m))
    return V, c


def build_identifiable(arch, box=8, seed=0, eps_fraction=Fraction(1, 2), verify=True):
    """Inductive slab construction; returns (Network, ConstructionTrail)."""
    from .checks import all_verdicts, analyse, genericity_check
    arch = _check_arch(arch)
    rng = random.Random(seed)
    trail = ConstructionTrail(arch, Fraction(box), seed)
    Ws, bs, _ = _build_slabs(arch, box, rng, trail, arch[1:-1], Fraction(eps_fraction))
    for attempt in range(MAX_OUTPUT_RESAMPLES):
        V, c = _random_output(arch, rng)
        net = Network(Ws + [V], bs + [c])
        an = analyse(net, box)
        if genericity_check(an.cx, seed).ok:
            trail.output_resamples = attempt
            break
    else:
        raise ConstructionError("output layer kept failing the genericity check", trail)
    if verify:
        trail.verdicts = all_verdicts(an, seed)
    return net, trail


# minimal non-identifiable construction

@dataclass
class LinearBlock:
    layer: int
    neurons: tuple

    def to_json(self):
        return {"layer": self.layer, "neurons": list(self.neurons)}


def build_minimal_nonidentifiable(arch, box=8, seed=0, eps_fraction=Fraction(1, 2)):
    """Identifiable prefix, last hidden layer = (n_L - 2) slab neurons + two always-active linear neurons."""
    arch = _check_arch(arch, min_last=4)
    if len(arch) < 4:
        raise ValueError("needs at least two hidden layers")
    rng = random.Random(seed)
    trail = ConstructionTrail(arch, Fraction(box), seed)
    widths = list(arch[1:-2]) + [arch[-2] - 2]
    Ws, bs, _ = _build_slabs(arch, box, rng, trail, widths, Fraction(eps_fraction))
    p = arch[-3]
    lin_W, lin_b = [], []
    while True:
        rows = [tuple(random_rational(rng, Fraction(1, 4), 1) for _ in range(p + 1)) for _ in range(2)]
        if exact_rank(rows) == 2 and all(v > 0 for r in rows for v in r):
            break
    for r in rows:
        lin_W.append(r[:-1])
        lin_b.append(r[-1])
    Ws[-1] = tuple(Ws[-1]) + tuple(lin_W)
    bs[-1] = tuple(bs[-1]) + tuple(lin_b)
    while True:
        V, c = _random_output(arch, rng)
        if exact_rank([r[-2:] for r in V]) == 2 or arch[-1] < 2:
            break
    net = Network(Ws + [V], bs + [c])
    block = LinearBlock(len(Ws), (arch[-2] - 2, arch[-2] - 1))
    if not linear_block_positive(net, block, box):
        raise ConstructionError("linear neurons are not positive on the prefix image", trail)
    return net, block, trail


def linear_block_positive(net: Network, block: LinearBlock, box=8, W_lin=None):
    """The block's preactivations are > 0 on the image of the box (entrywise test, then per-region LP)."""
    l = block.layer
    if W_lin is None:
        W_lin = [tuple(net.weights[l - 1][j]) + (net.biases[l - 1][j],) for j in block.neurons]
    if l == 1 or all(v > 0 for r in W_lin for v in r):
        if l == 1:
            return _positive_on_box(W_lin, net.input_dim, box)
        return True
    prefix = Network(list(net.weights[:l - 1]) + [[[Fraction(0)] * net.architecture[l - 1]]],
                     list(net.biases[:l - 1]) + [[Fraction(0)]])
    regions, _, _ = enumerate_regions(prefix, box)
    for reg in regions:
        T = Affine.identity(net.input_dim)
        for k, S in enumerate(active_sets(reg.signs)):
            T = T.then(net.weights[k], net.biases[k], S)
        for r in W_lin:
            lo, _ = _range(reg.polyhedron(net.input_dim), T.pull(r[:-1], r[-1]))
            if lo <= 0:
                return False
    return True


def _positive_on_box(rows, d, box):
    P = Polyhedron.box(d, box)
    return all(_range(P, (r[:-1], r[-1]))[0] > 0 for r in rows)


def gl2_fiber_walk(net: Network, block: LinearBlock, M, box=8) -> Network:
    """W_lin -> M W_lin, V_lin -> V_lin M^-1; the realized function is unchanged."""
    M = tuple(vec(r) for r in M)
    if M[0][0] * M[1][1] - M[0][1] * M[1][0] == 0:
        raise ValueError("M is singular")
    l = block.layer
    W, b = [list(r) for r in net.weights[l - 1]], list(net.biases[l - 1])
    aug = [tuple(W[j]) + (b[j],) for j in block.neurons]
    new = mat_mul(M, aug)
    if not linear_block_positive(net, block, box, W_lin=new):
        raise ConstructionError("walk step would make a linear neuron inactive somewhere")
    for r, j in zip(new, block.neurons):
        W[j], b[j] = list(r[:-1]), r[-1]
    Minv = inverse(M)
    V = [list(r) for r in net.weights[l]]
    cols = [[V[i][j] for j in block.neurons] for i in range(len(V))]
    newcols = mat_mul(cols, Minv)
    for i in range(len(V)):
        for t, j in enumerate(block.neurons):
            V[i][j] = newcols[i][t]
    Ws = list(net.weights)
    bs = list(net.biases)
    Ws[l - 1], bs[l - 1] = W, b
    Ws[l] = V
    return Network(Ws, bs)


# one hidden layer: compression and affine-difference signature

def _hyperplane_meets(P: Polyhedron, row):
    n, off = row
    if is_zero(n):
        return False
    lo, hi = _range(P, (n, off))
    return lo < 0 < hi


def compress_one_layer(net: Network, P: Polyhedron | None = None, box=8) -> Network:
    """Same function on P with one neuron per visible hyperplane; the rest carry the leftover affine part."""
    if net.depth != 1:
        raise ValueError("needs a single hidden layer")
    d, k_total, m = net.input_dim, net.architecture[1], net.output_dim
    P = P or Polyhedron.box(d, box)
    W1, b1 = net.weights[0], net.biases[0]
    V, c = net.weights[1], net.biases[1]
    A = [[Fraction(0)] * d for _ in range(m)]
    const = list(c)
    groups: dict = {}
    orient: dict = {}
    for i in range(k_total):
        row, bb = W1[i], b1[i]
        col = [V[r][i] for r in range(m)]
        if _hyperplane_meets(P, (row, bb)):
            key = canonical_hyperplane(row, bb)
            n_vec, off = key
            lam = next(r / q for r, q in zip(row, n_vec) if q != 0)
            # orient h_j like the first neuron on it, so that neuron needs no affine correction
            sign = orient.setdefault(key, 1 if lam > 0 else -1)
            lam *= sign
            g = groups.setdefault(key, [Fraction(0)] * m)
            for r in range(m):
                g[r] += abs(lam) * col[r]
            if lam < 0:
                # lam [h]_+ with lam < 0 equals |lam|([h]_+ - h)
                for r in range(m):
                    for t in range(d):
                        A[r][t] -= abs(lam) * col[r] * sign * n_vec[t]
                    const[r] -= abs(lam) * col[r] * sign * off
        else:
            x = affine_hull(P).point
            if dot(row, x) + bb > 0:
                for r in range(m):
                    for t in range(d):
                        A[r][t] += col[r] * row[t]
                    const[r] += col[r] * bb
    visible = [((tuple(orient[key] * v for v in key[0]), orient[key] * key[1]), a)
               for key, a in sorted(groups.items()) if any(v != 0 for v in a)]
    R, piv = rref(A) if any(any(v != 0 for v in r) for r in A) else ([], [])
    F = [R[i] for i in range(len(piv))]
    C = [[A[r][p] for p in piv] for r in range(m)]
    spare = k_total - len(visible)
    if len(F) > spare:
        raise ValueError(f"leftover affine part has rank {len(F)} but only {spare} neurons remain")
    radius = _polytope_radius(P)
    newW, newb = [], []
    cols = []
    for (n_vec, off), a in visible:
        newW.append(list(n_vec))
        newb.append(off)
        cols.append(list(a))
    for t, q in enumerate(F):
        beta = radius * sum(abs(v) for v in q) + 1
        newW.append(list(q))
        newb.append(beta)
        cols.append([C[r][t] for r in range(m)])
        for r in range(m):
            const[r] -= C[r][t] * beta
    while len(newW) < k_total:
        e = [Fraction(0)] * d
        e[0] = Fraction(1)
        newW.append(e)
        newb.append(radius + 1)
        cols.append([Fraction(0)] * m)
    V2 = [[cols[i][r] for i in range(k_total)] for r in range(m)]
    return Network([newW, V2], [newb, const])


def _polytope_radius(P: Polyhedron):
    """max |x_i| over P."""
    R = Fraction(0)
    for i in range(P.dim):
        e = [Fraction(0)] * P.dim
        e[i] = Fraction(1)
        lo, hi = _range(P, (tuple(e), Fraction(0)))
        R = max(R, abs(lo), abs(hi))
    return R


def visible_hyperplanes(net: Network, P: Polyhedron | None = None, box=8):
    """Distinct canonical hyperplanes carrying breakpoint facets that meet relint P."""
    from .tropical import breakpoint_complex
    cx = build_complex(net, box, P)
    bc = breakpoint_complex(cx)
    return sorted({cx.facets[i].hyperplane for i in bc.facets})


def affine_difference_signature(theta: Network, eta: Network, P: Polyhedron | None = None, box=8):
    """alpha with linear part of f_theta - f_eta on P equal to sum alpha_i W2[:, i] W1_i."""
    from .tropical import one_layer_weight
    if theta.depth != 1 or eta.depth != 1 or theta.architecture != eta.architecture:
        raise ValueError("needs two one-hidden-layer networks of the same shape")
    d = theta.input_dim
    P = P or Polyhedron.box(d, box)
    n = theta.architecture[1]
    match = []
    for i in range(n):
        h = canonical_hyperplane(theta.weights[0][i], theta.biases[0][i])
        js = [j for j in range(n) if not is_zero(eta.weights[0][j])
              and canonical_hyperplane(eta.weights[0][j], eta.biases[0][j]) == h]
        if len(js) != 1 or not _hyperplane_meets(P, (theta.weights[0][i], theta.biases[0][i])):
            raise ValueError(f"neuron {i}: hyperplanes do not match one-to-one inside P")
        j = js[0]
        H = (theta.weights[0][i], theta.biases[0][i])
        if one_layer_weight(theta, H) != one_layer_weight(eta, H):
            raise ValueError(f"tropical weights differ on hyperplane {i}")
        lam = next(b / a for a, b in zip(theta.weights[0][i], eta.weights[0][j]) if a != 0)
        match.append((j, lam))
    alpha = tuple(1 if lam < 0 else 0 for _, lam in match)
    # difference network: hidden = theta's and eta's neurons, output V_theta, -V_eta
    W1 = list(theta.weights[0]) + list(eta.weights[0])
    b1 = list(theta.biases[0]) + list(eta.biases[0])
    V = [list(r1) + [-v for v in r2] for r1, r2 in zip(theta.weights[1], eta.weights[1])]
    c = [a - b for a, b in zip(theta.biases[1], eta.biases[1])]
    diff = Network([W1, V], [b1, c])
    cx = build_complex(diff, box, P)
    parts = {tuple(map(tuple, r.piece.A)) for r in cx.regions}
    if len(parts) != 1:
        raise ValueError("f_theta - f_eta is not affine on P")
    D = next(iter(parts))
    m = theta.output_dim
    pred = [[sum(alpha[i] * theta.weights[1][r][i] * theta.weights[0][i][t] for i in range(n))
             for t in range(d)] for r in range(m)]
    if [list(r) for r in D] != pred:
        raise ValueError("region linear parts do not match the neuron signature")
    return alpha
