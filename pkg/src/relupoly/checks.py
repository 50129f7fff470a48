"""Verdicts on parameters: genericity, supertransversality, cancellation, cTPIC, identifiability, rank."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product

import numpy as np

from .arrangement import generic_arrangement_in_region
from .complex import CanonicalComplex, build_complex, local_complex
from .linalg import exact_rank, is_zero, mat_mul, mat_vec, vsub
from .lp import Polyhedron
from .net import Network, _select, active_sets, layer_maps
from .tropical import BreakpointComplex, all_weights, breakpoint_complex, facets_meeting, lra_check, transparency_check

PASS = "pass"
FAIL = "fail"
PROBABLE = "probabilistic-pass"

EXHAUSTIVE_LIMIT = 2 ** 16
RANDOM_SEQUENCES = 1024


@dataclass
class Verdict:
    name: str
    status: str
    witnesses: list = field(default_factory=list)
    notes: str = ""

    @property
    def ok(self) -> bool:
        return self.status in (PASS, PROBABLE)

    def to_json(self) -> dict:
        return {"property": self.name, "status": self.status, "witnesses": _jsonable(self.witnesses),
                "notes": self.notes}


def _jsonable(obj):
    from .linalg import fmt_rational
    if isinstance(obj, Fraction):
        return fmt_rational(obj)
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [_jsonable(v) for v in items]
    return obj


# genericity

def _condition_one(cx: CanonicalComplex):
    net = cx.net
    d = cx.dim
    dom_cells = [(None, cx.domain.ineqs, tuple(("dom", i) for i in range(len(cx.domain.ineqs))))]
    for l in range(1, net.depth + 1):
        cells = dom_cells if l == 1 else [(c.signs, c.rows, c.labels) for c in cx.stages[l - 2]]
        for signs, rows, labels in cells:
            S = active_sets(signs) if signs else ()
            M, c = layer_maps(net, S)[l - 1]
            H = []
            for j, (a, b) in enumerate(zip(M, c)):
                if is_zero(a):
                    if b == 0:
                        return {"layer": l, "cell": signs, "neuron": (l, j), "reason": "preactivation identically zero"}
                    continue
                H.append((a, b))
            if not H:
                continue
            skip = [i for i, lab in enumerate(labels) if lab[0] == "dom"]
            if not generic_arrangement_in_region(H, Polyhedron(rows, (), d), skip):
                return {"layer": l, "cell": signs, "reason": "arrangement not generic in cell"}
    return None


def _product_rank(net: Network, k: int, l: int, S) -> tuple:
    """rank of W^l D_{S_{l-1}} ... D_{S_k} W^k and the expected maximum."""
    M = net.weights[k - 1]
    for t, s in zip(range(k + 1, l + 1), S):
        M = mat_mul(_select(net.weights[t - 1], s), M)
    arch = net.architecture
    bound = min([arch[l], arch[k - 1]] + [len(s) for s in S])
    return exact_rank(M), bound


def _condition_two(net: Network, rng: random.Random):
    arch = net.architecture
    L1 = net.depth + 1
    probabilistic = False
    for k in range(1, L1 + 1):
        for l in range(k, L1 + 1):
            mids = list(range(k, l))   # layers whose selectors appear
            total = 1
            for i in mids:
                total *= 2 ** arch[i]
            if total <= EXHAUSTIVE_LIMIT:
                seqs = product(*[[frozenset(c) for r in range(arch[i] + 1) for c in combinations(range(arch[i]), r)]
                                 for i in mids])
            else:
                probabilistic = True
                seqs = ([frozenset(j for j in range(arch[i]) if rng.random() < 0.5) for i in mids]
                        for _ in range(RANDOM_SEQUENCES))
            for S in seqs:
                r, bound = _product_rank(net, k, l, S)
                if r != bound:
                    return {"k": k, "l": l, "S": [sorted(s) for s in S], "rank": r, "expected": bound}, probabilistic
    return None, probabilistic


def genericity_check(cx: CanonicalComplex, seed=0) -> Verdict:
    w1 = _condition_one(cx)
    w2, prob = _condition_two(cx.net, random.Random(seed))
    failed = [(w, note) for w, note in ((w1, "condition 1 (arrangements)"),
                                        (w2, "condition 2 (rank of selector products)")) if w is not None]
    if failed:
        return Verdict("generic", FAIL, [w for w, _ in failed], "; ".join(n for _, n in failed))
    if prob:
        return Verdict("generic", PROBABLE, [], f"condition 2 sampled with {RANDOM_SEQUENCES} sequences per (k, l)")
    return Verdict("generic", PASS)


def supertransversality_check(cx: CanonicalComplex) -> Verdict:
    bad = []
    for f in cx.facets:
        if len(f.neurons) != 1:
            bad.append({"facet": f.index, "neurons": list(f.neurons)})
    for r in cx.ridges:
        if len(r.neurons) != 2:
            bad.append({"ridge": r.index, "point": r.point, "neurons": list(r.neurons)})
    for signs, neuron in cx.degenerate:
        bad.append({"degenerate": neuron, "cell": signs})
    return Verdict("supertransversal", FAIL if bad else PASS, bad)


def _layer_inactive(f, k):
    return all(s < 0 or (s == 0 and (k, j) not in f.neurons) for j, s in enumerate(f.signs[k - 1]))


def cancellation_free_check(cx: CanonicalComplex, weights=None) -> Verdict:
    ws = weights or all_weights(cx)
    bad = []
    for f in cx.facets:
        dead = any(_layer_inactive(f, k) for k in range(1, cx.net.depth + 1))
        if ws[f.index].is_zero() != dead:
            bad.append({"facet": f.index, "zero_weight": ws[f.index].is_zero(), "dead_layer": dead})
    return Verdict("cancellation-free", FAIL if bad else PASS, bad)


def transparency_verdict(cx: CanonicalComplex, X: Polyhedron | None = None) -> Verdict:
    bad = []
    for l in range(2, cx.net.depth + 1):
        ok, w = transparency_check(cx, l, X)
        if not ok:
            bad.append({"layer": l, "cells": w})
    return Verdict("transparent", FAIL if bad else PASS, bad)


def lra_verdict(cx: CanonicalComplex, X: Polyhedron | None = None, weights=None) -> Verdict:
    ok, bad = lra_check(cx, X, weights)
    return Verdict("LRA", PASS if ok else FAIL, [{"facet": i} for i in bad])


# cTPIC

def visible_components(bc: BreakpointComplex, X: Polyhedron | None = None) -> dict:
    """neuron -> list of connected components (frozensets of facets) of its visible facets."""
    cx = bc.cx
    nonzero = set(bc.facets)
    inside = {f.index for f in facets_meeting(cx, X)} if X is not None else {f.index for f in cx.facets}
    by_neuron: dict = {n: [] for n in cx.net.hidden()}
    for f in cx.facets:
        if f.index in nonzero and f.index in inside:
            for n in f.neurons:
                by_neuron[n].append(f.index)
    ridge_of = {}
    for r in cx.ridges:
        for fi in r.facets:
            ridge_of.setdefault(fi, set()).add(r.index)
    out = {}
    for n, fs in by_neuron.items():
        remaining = set(fs)
        comps = []
        while remaining:
            start = min(remaining)
            stack = [start]
            comp = {start}
            remaining.discard(start)
            while stack:
                a = stack.pop()
                for b in list(remaining):
                    if ridge_of.get(a, set()) & ridge_of.get(b, set()):
                        remaining.discard(b)
                        comp.add(b)
                        stack.append(b)
            comps.append(frozenset(comp))
        out[n] = sorted(comps, key=lambda c: min(c))
    return out


def _ridges_of(cx, comp):
    return {r.index for r in cx.ridges if comp & set(r.facets)}


def ctpic_check(bc: BreakpointComplex, X: Polyhedron | None = None) -> Verdict:
    cx = bc.cx
    net = cx.net
    if net.depth == 1:
        return Verdict("cTPIC", PASS, [], "no adjacent pair of hidden layers")
    comps = visible_components(bc, X)
    missing = [n for n, cs in comps.items() if not cs]
    if missing:
        return Verdict("cTPIC", FAIL, [{"neurons_without_visible_facets": missing}])
    neurons = net.hidden()
    ridge_sets = {n: [_ridges_of(cx, c) for c in comps[n]] for n in neurons}

    def failures(choice):
        bad = []
        for l in range(1, net.depth):
            for i in range(net.architecture[l]):
                for j in range(net.architecture[l + 1]):
                    a, b = (l, i), (l + 1, j)
                    if not ridge_sets[a][choice[a]] & ridge_sets[b][choice[b]]:
                        bad.append((a, b))
        return bad

    # greedy: pick for each neuron the component meeting the most adjacent-layer components
    choice = {}
    for n in neurons:
        l = n[0]
        nbrs = [m for m in neurons if abs(m[0] - l) == 1]

        def score(ci):
            rs = ridge_sets[n][ci]
            return sum(any(rs & other for other in ridge_sets[m]) for m in nbrs)
        choice[n] = max(range(len(comps[n])), key=lambda ci: (score(ci), -ci))
    bad = failures(choice)
    if not bad:
        return Verdict("cTPIC", PASS, [{"components": {f"{n[0]},{n[1]}": sorted(comps[n][choice[n]]) for n in neurons}}])
    sizes = [len(comps[n]) for n in neurons]
    total = 1
    for s in sizes:
        total *= s
    if total <= 4096:
        best = bad
        for pick in product(*[range(s) for s in sizes]):
            ch = dict(zip(neurons, pick))
            b = failures(ch)
            if not b:
                return Verdict("cTPIC", PASS, [{"components": {f"{n[0]},{n[1]}": sorted(comps[n][ch[n]]) for n in neurons}}],
                               "found by exhaustive search")
            if len(b) < len(best):
                best = b
        bad = best
    return Verdict("cTPIC", FAIL, [{"missing_pairs": bad}])


# aggregate

@dataclass
class Analysis:
    cx: CanonicalComplex
    bc: BreakpointComplex


def analyse(net: Network, box=8, domain=None, seed=None) -> Analysis:
    cx = build_complex(net, box, domain, seed)
    return Analysis(cx, breakpoint_complex(cx))


def all_verdicts(an: Analysis, seed=0) -> list:
    cx, bc = an.cx, an.bc
    return [
        genericity_check(cx, seed),
        supertransversality_check(cx),
        cancellation_free_check(cx, bc.weights),
        transparency_verdict(cx),
        lra_verdict(cx, None, bc.weights),
        ctpic_check(bc),
    ]


def identifiability_verdict(net: Network, box=8, candidates=(), seed=0, analysis=None) -> dict:
    """Generic + cTPIC + LRA on some full-dimensional polytope (the box first, then the candidates)."""
    an = analysis or analyse(net, box)
    gen = genericity_check(an.cx, seed)
    tried = []
    for name, P in [("box", None)] + list(candidates):
        if P is None:
            a = an
        else:
            cxP = local_complex(net, P)
            a = Analysis(cxP, breakpoint_complex(cxP))
        ct = ctpic_check(a.bc)
        lra = lra_verdict(a.cx, None, a.bc.weights)
        tried.append({"polytope": name, "cTPIC": ct.status, "LRA": lra.status})
        if ct.ok and lra.ok:
            if gen.ok:
                return {"verdict": "identifiable among generic parameters", "polytope": name,
                        "generic": gen.status, "tried": tried}
            break
    failed = []
    if not gen.ok:
        failed.append("generic")
    if not any(t["cTPIC"] == PASS for t in tried):
        failed.append("cTPIC")
    if not any(t["LRA"] == PASS for t in tried):
        failed.append("LRA")
    if not failed:
        failed.append("cTPIC and LRA on a common polytope")
    return {"verdict": "premises fail (" + ", ".join(failed) + ")", "generic": gen.status, "tried": tried}


# functional dimension

def expected_dimension(arch) -> int:
    """sum n_l n_{l-1} + n_{L+1}: parameter count minus one scaling per hidden neuron."""
    return sum(arch[l] * arch[l - 1] for l in range(1, len(arch))) + arch[-1]


@dataclass
class JacobianSample:
    X: np.ndarray
    J: np.ndarray
    singular_values: np.ndarray
    rank: int
    gap: float


def _float_params(net: Network):
    return [np.array([[float(v) for v in r] for r in W]) for W in net.weights], \
           [np.array([float(v) for v in b]) for b in net.biases]


def parameter_jacobian(net: Network, X: np.ndarray) -> np.ndarray:
    """d f(x) / d theta stacked over samples and output coordinates; parameters ordered W1, b1, W2, b2, ..."""
    Ws, bs = _float_params(net)
    m = net.output_dim
    rows = []
    for x in X:
        acts = [x]
        masks = []
        a = x
        for W, b in zip(Ws[:-1], bs[:-1]):
            z = W @ a + b
            mask = (z > 0).astype(float)
            masks.append(mask)
            a = z * mask
            acts.append(a)
        for k in range(m):
            delta = np.zeros(m)
            delta[k] = 1.0
            grads = []
            for l in range(len(Ws) - 1, -1, -1):
                grads.append((np.outer(delta, acts[l]).ravel(), delta.copy()))
                if l > 0:
                    delta = (Ws[l].T @ delta) * masks[l - 1]
            flat = []
            for gW, gb in reversed(grads):
                flat.append(gW)
                flat.append(gb)
            rows.append(np.concatenate(flat))
    return np.array(rows)


def sample_inputs(net: Network, n: int, box, seed, tol=1e-9, retries=100) -> np.ndarray:
    rng = np.random.default_rng(seed)
    Ws, bs = _float_params(net)
    R = float(box)
    out = []
    for _ in range(n):
        for _attempt in range(retries):
            x = rng.uniform(-R, R, size=net.input_dim)
            a = x
            ok = True
            for W, b in zip(Ws[:-1], bs[:-1]):
                z = W @ a + b
                if np.any(np.abs(z) < tol * max(1.0, np.abs(z).max())):
                    ok = False
                    break
                a = np.maximum(z, 0)
            if ok:
                out.append(x)
                break
        else:
            raise RuntimeError("samples keep landing on non-differentiable points")
    return np.array(out)


def functional_dimension_estimate(net: Network, n_samples=200, seed=0, box=8, extra_points=(),
                                  region_points=True, cx=None) -> JacobianSample:
    """Rank of the parameter Jacobian at random inputs plus one interior point per region of the box.

    Thin regions (slab layers) are easy to miss by uniform sampling, hence the region points.
    """
    X = sample_inputs(net, n_samples, box, seed)
    if region_points:
        cx = cx or build_complex(net, box)
        extra_points = list(extra_points) + [r.point for r in cx.regions]
    if len(extra_points):
        X = np.vstack([X, np.array([[float(v) for v in p] for p in extra_points])])
    J = parameter_jacobian(net, X)
    s = np.linalg.svd(J, compute_uv=False)
    cutoff = 1e-8 * s[0] if len(s) else 0.0
    rank = int(np.sum(s > cutoff))
    if rank < len(s):
        gap = float(s[rank - 1] / s[rank]) if s[rank] > 0 else float("inf")
    else:
        gap = float("inf")
    return JacobianSample(X, J, s, rank, gap)


# width lower bound

def min_width_lower_bound(net: Network, A, P: Polyhedron | None = None) -> int:
    """n + min over alpha in {-1,0,1}^n of rank((A + sum alpha_i W2[:,i] W1_i) Q)."""
    from .linalg import mat, nullspace
    if net.depth != 1:
        raise ValueError("needs a single hidden layer")
    n = net.architecture[1]
    d = net.input_dim
    A = mat(A)
    if P is not None:
        from .lp import affine_hull, strictly_feasible
        for a, b in zip(net.weights[0], net.biases[0]):
            probe = P.add(eqs=[(a, b)])
            if affine_hull(probe).dim != affine_hull(P).dim - 1:
                raise ValueError("hyperplane is not inside P")
        eqn = [a for a, _ in P.eqs]
        Q = nullspace(eqn, d) if eqn else None
    else:
        Q = None
    W1, W2 = net.weights[0], net.weights[1]
    best = None
    for alpha in product((-1, 0, 1), repeat=n):
        M = [list(r) for r in A]
        for i, al in enumerate(alpha):
            if al:
                for r in range(len(M)):
                    for c in range(d):
                        M[r][c] += al * W2[r][i] * W1[i][c]
        if Q is not None:
            M = [[sum(row[c] * q[c] for c in range(d)) for q in Q] for row in M]
        r = exact_rank(M)
        if best is None or r < best:
            best = r
    return n + best


# stability under perturbation

def perturb(net: Network, rng: random.Random, rel=Fraction(1, 1000), den=2 ** 16) -> Network:
    """Multiply every parameter by 1 + rel * u with u a random rational in [-1, 1]."""
    def jitter(v):
        return v * (1 + rel * Fraction(rng.randint(-den, den), den))
    return Network([[[jitter(v) for v in r] for r in W] for W in net.weights],
                   [[jitter(v) for v in b] for b in net.biases])


def _stable(task):
    net, box = task
    an = analyse(net, box)
    bad = [v.name for v in (ctpic_check(an.bc), lra_verdict(an.cx, None, an.bc.weights)) if not v.ok]
    return bad


def perturbation_study(net: Network, trials=100, rel=Fraction(1, 1000), seed=1, box=8) -> dict:
    """Re-run cTPIC and LRA on random relative perturbations of net."""
    from .parallel import pmap
    rng = random.Random(seed)
    nets = [perturb(net, rng, rel) for _ in range(trials)]
    results = pmap(_stable, [(n, box) for n in nets])
    failed = [{"trial": i, "failed": bad} for i, bad in enumerate(results) if bad]
    return {"trials": trials, "relative": str(rel), "seed": seed, "failures": len(failed), "failed": failed}
