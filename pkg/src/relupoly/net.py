"""ReLU networks with rational parameters."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations, product
from typing import Sequence

from .linalg import fmt_rational, mat, mat_mul, mat_vec, parse_rational, primitive, vec


class ShapeError(ValueError):
    pass


@dataclass(frozen=True)
class AffinePiece:
    A: tuple  # m x d
    b: tuple  # m

    def __call__(self, x):
        return tuple(v + c for v, c in zip(mat_vec(self.A, x), self.b))

    def is_constant(self) -> bool:
        return all(v == 0 for row in self.A for v in row)


@dataclass(frozen=True)
class Forward:
    pre: tuple   # per hidden layer preactivations z^(l)
    post: tuple  # per hidden layer activations a^(l)
    out: tuple


def _int_layer(W, b):
    den = 1
    for row in W:
        for v in row:
            den = den * v.denominator // math.gcd(den, v.denominator)
    for v in b:
        den = den * v.denominator // math.gcd(den, v.denominator)
    Wi = [[int(v * den) for v in row] for row in W]
    bi = [int(v * den) for v in b]
    return Wi, bi, den


class Network:
    """Parameter theta = ((W1, b1), ..., (W_{L+1}, b_{L+1}))."""

    def __init__(self, weights: Sequence, biases: Sequence):
        self.weights = tuple(mat(W) for W in weights)
        self.biases = tuple(vec(b) for b in biases)
        if len(self.weights) != len(self.biases) or len(self.weights) < 2:
            raise ShapeError("need at least one hidden layer and matching biases")
        arch = [len(self.weights[0][0]) if self.weights[0] else 0]
        for W, b in zip(self.weights, self.biases):
            if len(W) != len(b):
                raise ShapeError("bias length does not match weight rows")
            if any(len(r) != arch[-1] for r in W):
                raise ShapeError("weight columns do not match previous width")
            arch.append(len(W))
        if any(w < 1 for w in arch):
            raise ShapeError("all widths must be positive")
        self.architecture = tuple(arch)
        self._ints = [_int_layer(W, b) for W, b in zip(self.weights, self.biases)]

    # structure
    @property
    def depth(self) -> int:
        return len(self.weights) - 1

    @property
    def input_dim(self) -> int:
        return self.architecture[0]

    @property
    def output_dim(self) -> int:
        return self.architecture[-1]

    def hidden(self):
        """All hidden neurons as (layer, j), layer counted from 1."""
        return [(l, j) for l in range(1, self.depth + 1) for j in range(self.architecture[l])]

    def n_params(self) -> int:
        a = self.architecture
        return sum(a[l] * a[l - 1] + a[l] for l in range(1, len(a)))

    def __eq__(self, other):
        return isinstance(other, Network) and self.weights == other.weights and self.biases == other.biases

    def __hash__(self):
        return hash((self.weights, self.biases))

    def __repr__(self):
        return f"Network{self.architecture}"

    def replace_layer(self, l: int, W=None, b=None) -> "Network":
        Ws = list(self.weights)
        bs = list(self.biases)
        if W is not None:
            Ws[l - 1] = W
        if b is not None:
            bs[l - 1] = b
        return Network(Ws, bs)

    def prefix(self, l: int) -> list:
        """Layers 1..l as (W, b) pairs."""
        return list(zip(self.weights[:l], self.biases[:l]))

    # evaluation
    def forward(self, x) -> Forward:
        x = vec(x)
        if len(x) != self.input_dim:
            raise ShapeError(f"input has length {len(x)}, expected {self.input_dim}")
        den = 1
        for v in x:
            den = den * v.denominator // math.gcd(den, v.denominator)
        a = [int(v * den) for v in x]
        pres, posts = [], []
        for k, (Wi, bi, wd) in enumerate(self._ints):
            z = [sum(w * v for w, v in zip(row, a)) + c * den for row, c in zip(Wi, bi)]
            den = den * wd
            if k < self.depth:
                pres.append(tuple(Fraction(v, den) for v in z))
                a = [v if v > 0 else 0 for v in z]
                posts.append(tuple(Fraction(v, den) for v in a))
            else:
                out = tuple(Fraction(v, den) for v in z)
            g = math.gcd(den, *a) if k < self.depth else 1
            if g > 1:
                a = [v // g for v in a]
                den //= g
        return Forward(tuple(pres), tuple(posts), out)

    def __call__(self, x):
        return self.forward(x).out

    def preactivations(self, x):
        return self.forward(x).pre


def activation_pattern(net: Network, x) -> tuple:
    f = net.forward(x)
    return tuple(tuple((v > 0) - (v < 0) for v in z) for z in f.pre)


def active_sets(signs) -> tuple:
    return tuple(frozenset(j for j, s in enumerate(layer) if s > 0) for layer in signs)


def _select(W, S):
    """W with the columns outside S zeroed (W . D_S)."""
    return tuple(tuple(v if j in S else Fraction(0) for j, v in enumerate(row)) for row in W)


def layer_maps(net: Network, S) -> list:
    """Affine maps (M_l, c_l) of the preactivations of layers 1..len(S)+1 under active sets S."""
    M, c = net.weights[0], net.biases[0]
    maps = [(M, c)]
    for l, Sl in enumerate(S, start=1):
        if l >= len(net.weights):
            break
        W = _select(net.weights[l], Sl)
        M = mat_mul(W, M)
        c = tuple(v + bb for v, bb in zip(mat_vec(W, c), net.biases[l]))
        maps.append((M, c))
    return maps


def affine_map_for_pattern(net: Network, S) -> AffinePiece:
    S = [frozenset(s) for s in S]
    if len(S) != net.depth:
        raise ShapeError("need one active set per hidden layer")
    M, c = layer_maps(net, S)[-1]
    return AffinePiece(M, c)


# symmetries

def permute_layer(net: Network, l: int, perm: Sequence[int]) -> Network:
    """Reorder the neurons of hidden layer l: new neuron i is old neuron perm[i]."""
    if not 1 <= l <= net.depth:
        raise ValueError("permutations act on hidden layers only")
    if sorted(perm) != list(range(net.architecture[l])):
        raise ValueError("not a permutation")
    Ws, bs = list(net.weights), list(net.biases)
    Ws[l - 1] = tuple(Ws[l - 1][p] for p in perm)
    bs[l - 1] = tuple(bs[l - 1][p] for p in perm)
    Ws[l] = tuple(tuple(row[p] for p in perm) for row in Ws[l])
    return Network(Ws, bs)


def scale_neuron(net: Network, l: int, j: int, lam) -> Network:
    lam = parse_rational(lam)
    if lam <= 0:
        raise ValueError("scaling factor must be positive")
    if not 1 <= l <= net.depth:
        raise ValueError("scalings act on hidden layers only")
    Ws, bs = list(net.weights), list(net.biases)
    Ws[l - 1] = tuple(tuple(v * lam for v in row) if i == j else row for i, row in enumerate(Ws[l - 1]))
    bs[l - 1] = tuple(v * lam if i == j else v for i, v in enumerate(bs[l - 1]))
    Ws[l] = tuple(tuple(v / lam if k == j else v for k, v in enumerate(row)) for row in Ws[l])
    return Network(Ws, bs)


def apply_symmetry(net: Network, action) -> Network:
    """action = ("perm", l, perm) or ("scale", l, j, lam)."""
    kind = action[0]
    if kind == "perm":
        return permute_layer(net, action[1], action[2])
    if kind == "scale":
        return scale_neuron(net, action[1], action[2], action[3])
    raise ValueError(f"unknown action {kind!r}")


def _normalize_layer(Ws, bs, l):
    """Scale every neuron of hidden layer l to a primitive integer incoming row."""
    for j in range(len(bs[l - 1])):
        row = Ws[l - 1][j] + (bs[l - 1][j],)
        if any(v != 0 for v in row):
            _, s = primitive(row)
        else:
            col = tuple(r[j] for r in Ws[l])
            if all(v == 0 for v in col):
                continue
            _, t = primitive(col)
            s = 1 / t
        Ws[l - 1] = tuple(tuple(v * s for v in r) if i == j else r for i, r in enumerate(Ws[l - 1]))
        bs[l - 1] = tuple(v * s if i == j else v for i, v in enumerate(bs[l - 1]))
        Ws[l] = tuple(tuple(v / s if k == j else v for k, v in enumerate(r)) for r in Ws[l])


def _key(Ws, bs, l, j):
    return Ws[l - 1][j] + (bs[l - 1][j],)


def _canon(Ws, bs, l, depth):
    if l > depth:
        return (tuple(Ws), tuple(bs))
    Ws, bs = list(Ws), list(bs)
    _normalize_layer(Ws, bs, l)
    n = len(bs[l - 1])
    order = sorted(range(n), key=lambda j: _key(Ws, bs, l, j))
    groups = []
    for j in order:
        if groups and _key(Ws, bs, l, groups[-1][0]) == _key(Ws, bs, l, j):
            groups[-1].append(j)
        else:
            groups.append([j])
    best = None
    # tied neurons: try every internal order and keep the smallest result
    for choice in product(*[permutations(g) for g in groups]):
        perm = [j for g in choice for j in g]
        W2 = list(Ws)
        b2 = list(bs)
        W2[l - 1] = tuple(Ws[l - 1][p] for p in perm)
        b2[l - 1] = tuple(bs[l - 1][p] for p in perm)
        W2[l] = tuple(tuple(row[p] for p in perm) for row in Ws[l])
        cand = _canon(W2, b2, l + 1, depth)
        if best is None or cand < best:
            best = cand
    return best


def canonical_form(net: Network) -> tuple:
    """Representative of the orbit under permutations and positive scalings."""
    return _canon(list(net.weights), list(net.biases), 1, net.depth)


def canonicalize(net: Network) -> Network:
    Ws, bs = canonical_form(net)
    return Network(Ws, bs)


def equivalent_mod_symmetries(a: Network, b: Network) -> bool:
    if a.architecture != b.architecture:
        return False
    return canonical_form(a) == canonical_form(b)


# JSON

def to_json(net: Network) -> dict:
    return {
        "architecture": list(net.architecture),
        "layers": [
            {"W": [[fmt_rational(v) for v in row] for row in W], "b": [fmt_rational(v) for v in b]}
            for W, b in zip(net.weights, net.biases)
        ],
    }


def from_json(data: dict) -> Network:
    try:
        layers = data["layers"]
        net = Network([L["W"] for L in layers], [L["b"] for L in layers])
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        if isinstance(exc, ShapeError):
            raise
        raise ShapeError(f"malformed network description: {exc}") from exc
    if "architecture" in data and tuple(data["architecture"]) != net.architecture:
        raise ShapeError(f"architecture {data['architecture']} does not match layer shapes {list(net.architecture)}")
    return net


def dumps(net: Network) -> str:
    return json.dumps(to_json(net), indent=1)


def loads(text: str) -> Network:
    return from_json(json.loads(text))


def load(path) -> Network:
    with open(path) as fh:
        return loads(fh.read())
