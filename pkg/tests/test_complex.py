from fractions import Fraction as F
from itertools import product

import numpy as np
from hypothesis import given, settings
from scipy.optimize import linprog

from relupoly.complex import bent_hyperplane, build_complex, complex_to_json, local_complex
from relupoly.gallery import bent_corner_net, min_max_realizations
from relupoly.lp import Polyhedron
from relupoly.net import Network, _select, layer_maps

from strategies import networks, points


def oracle_region_count(net, R):
    """Full-dimensional sign patterns in [-R, R]^d by brute force and a float LP."""
    d = net.input_dim
    widths = net.architecture[1:-1]
    count = 0
    for signs in product(*[list(product((1, -1), repeat=w)) for w in widths]):
        S = [{j for j, s in enumerate(sl) if s > 0} for sl in signs]
        maps = layer_maps(net, S)
        A_ub, b_ub = [], []
        for (M, c), sl in zip(maps, signs):
            for row, off, s in zip(M, c, sl):
                # s * (row.x + off) >= t
                A_ub.append([-s * float(v) for v in row] + [1.0])
                b_ub.append(s * float(off))
        res = linprog([0.0] * d + [-1.0], A_ub=A_ub, b_ub=b_ub,
                      bounds=[(-float(R), float(R))] * d + [(None, 1.0)], method="highs")
        if res.status == 0 and -res.fun > 1e-9:
            count += 1
    return count


def test_quadrants():
    net = Network([[[1, 0], [0, 1]], [[1, 1]]], [[0, 0], [0]])
    cx = build_complex(net, 1)
    assert len(cx.regions) == 4
    assert len(cx.facets) == 4
    assert len(cx.ridges) == 1 and cx.ridges[0].point == (0, 0)


def test_single_neuron():
    net = Network([[[1, 1]], [[1]]], [[F(1, 3)], [0]])
    cx = build_complex(net, 8)
    assert (len(cx.regions), len(cx.facets), len(cx.ridges)) == (2, 1, 0)


def test_bent_corner_net():
    net = bent_corner_net()
    cx = build_complex(net, 8)
    assert len(cx.regions) == 7
    # the layer-2 curve has three segments and bends at (0, 2) and (3, 0)
    red = bent_hyperplane(cx, (2, 0))
    assert len(red) == 3
    corners = {r.point for r in cx.ridges if (2, 0) in r.neurons}
    assert {(0, 2), (3, 0)} <= corners


def test_first_layer_facets_are_flat():
    cx = build_complex(bent_corner_net(), 8)
    for j in (0, 1):
        hs = {cx.facets[i].hyperplane for i in bent_hyperplane(cx, (1, j))}
        assert len(hs) == 1


def test_dead_neuron_has_no_facets():
    net = Network([[[1, 0], [0, 0]], [[1, 1]]], [[0, -1], [0]])
    cx = build_complex(net, 4)
    assert bent_hyperplane(cx, (1, 1)) == []


def test_realization_one_region_count_matches_oracle():
    net = min_max_realizations()[0]
    cx = build_complex(net, 5)
    assert len(cx.regions) == oracle_region_count(net, 5)


@settings(max_examples=25)
@given(networks())
def test_region_count_matches_oracle(net):
    cx = build_complex(net, 4)
    if cx.degenerate:
        return
    assert len(cx.regions) == oracle_region_count(net, 4)


@settings(max_examples=25)
@given(networks(), points(2, 4))
def test_pieces_agree_with_network(net, x):
    cx = build_complex(net, 4)
    hits = cx.region_at(x)
    assert hits, "every box point lies in some region"
    for i in hits:
        assert cx.regions[i].piece(x) == net(x)


@settings(max_examples=20)
@given(networks())
def test_facet_adjacency_consistent(net):
    cx = build_complex(net, 4)
    for f in cx.facets:
        P, Q = f.regions
        assert P != Q
        n, off = f.hyperplane
        assert sum(a * v for a, v in zip(n, f.point)) + off == 0
        assert cx.regions[P].contains(f.point) and cx.regions[Q].contains(f.point)
    for r in cx.ridges:
        assert len(r.facets) >= 2


def test_local_complex_box_is_identity():
    net = bent_corner_net()
    a = build_complex(net, 8)
    b = local_complex(net, Polyhedron.box(2, 8))
    assert len(a.regions) == len(b.regions) and len(a.facets) == len(b.facets)


def test_local_complex_of_one_region():
    net = bent_corner_net()
    cx = build_complex(net, 8)
    reg = cx.regions[0]
    loc = local_complex(net, reg.polyhedron(2))
    assert len(loc.regions) == 1 and loc.facets == []


def test_complex_json_shape():
    cx = build_complex(bent_corner_net(), 8)
    data = complex_to_json(cx)
    assert len(data["regions"]) == 7
    assert all(len(f["regions"]) == 2 for f in data["facets"])
    assert data["summary"]["regions"] == 7
