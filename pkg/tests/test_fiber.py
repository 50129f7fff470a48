from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from relupoly.checks import analyse
from relupoly.construct import build_identifiable, build_minimal_nonidentifiable, gl2_fiber_walk
from relupoly.depgraph import DependencyGraph, dependency_graph
from relupoly.fiber import (Configuration, Poly, breakpoint_data, emit_configuration_system, enumerate_configurations,
                            ground_truth_configuration, membership_by_substitution, parameter_values, respects_order,
                            verify_membership)
from relupoly.net import Network


def graph(n, edges):
    return DependencyGraph([frozenset([i]) for i in range(n)], {i: i for i in range(n)},
                           {e: [] for e in edges}, [])


def setup(net):
    an = analyse(net)
    G = dependency_graph(an.bc)
    cfg = ground_truth_configuration(an.bc, G)
    data = breakpoint_data(an.bc)
    return an, G, cfg, data


# polynomials

@given(st.integers(-20, 20), st.integers(-20, 20), st.integers(-20, 20))
def test_poly_arithmetic_matches_numbers(a, b, c):
    x, y = Poly.var("x"), Poly.var("y")
    p = (x + Poly.const(a)) * (y - Poly.const(b)) - Poly.const(c) * x * x
    v = {"x": F(a, 3), "y": F(b + 1, 7)}
    assert p.evaluate(v) == (v["x"] + a) * (v["y"] - b) - c * v["x"] ** 2


def test_poly_cancellation_drops_terms():
    x = Poly.var("x")
    assert (x - x).terms == {}
    assert (x * x - x * x + Poly.const(2)).variables() == set()


# configurations

def test_chain_fits_only_one_way():
    G = graph(3, [(0, 1), (1, 2)])
    configs, truncated = enumerate_configurations(G, (2, 1, 1, 1, 1))
    assert configs == [{0: (1, 0), 1: (2, 0), 2: (3, 0)}] and not truncated


def test_chain_too_long_for_depth():
    assert enumerate_configurations(graph(3, [(0, 1), (1, 2)]), (2, 2, 2, 1))[0] == []


def test_pigeonhole():
    assert enumerate_configurations(graph(3, []), (2, 2, 1))[0] == []
    assert len(enumerate_configurations(graph(2, []), (2, 1, 1, 1))[0]) == 2


def test_cap_truncates():
    configs, truncated = enumerate_configurations(graph(4, []), (2, 4, 4, 4, 1), cap=5)
    assert len(configs) == 5 and truncated


def test_enumerated_configurations_respect_order():
    G = graph(4, [(0, 2), (1, 2), (2, 3)])
    configs, _ = enumerate_configurations(G, (2, 2, 2, 2, 1))
    assert configs and all(respects_order(G, phi) for phi in configs)


# emitted systems

@pytest.fixture(scope="module")
def single():
    net = Network([[[1, 1]], [[2]]], [[-1], [F(1, 2)]])
    return (net,) + setup(net)


def test_single_neuron_counts(single):
    net, an, G, cfg, data = single
    system = emit_configuration_system(an.bc, G, cfg, net.architecture, data)
    assert system.counts() == {"alignment": 2, "offset": 1, "weight": 1, "nonzero": 1}
    assert verify_membership(net, G, cfg, data)
    assert membership_by_substitution(system, net, G, cfg, data)


def test_single_neuron_fiber_is_positive_rescaling(single):
    net, an, G, cfg, data = single
    scaled = Network([[[3, 3]], [[F(2, 3)]]], [[-3], [F(1, 2)]])
    flipped = Network([[[-1, -1]], [[2]]], [[1], [F(1, 2)]])
    assert verify_membership(scaled, G, cfg, data)
    # a negative scale satisfies the emitted equations; the sign restriction is not part of the system
    assert verify_membership(flipped, G, cfg, data)
    moved = Network([[[1, 2]], [[2]]], [[-1], [F(1, 2)]])
    assert not verify_membership(moved, G, cfg, data)


def test_order_violation_rejected(single):
    net, an, G, cfg, data = single
    G2 = graph(2, [(0, 1)])
    with pytest.raises(ValueError):
        emit_configuration_system(an.bc, G2, Configuration({0: (2, 0), 1: (1, 0)}, cfg.signs), (2, 1, 1, 1), data)
    assert not verify_membership(net, G2, Configuration({0: (2, 0), 1: (1, 0)}, cfg.signs), data)


def test_text_and_json(single):
    net, an, G, cfg, data = single
    system = emit_configuration_system(an.bc, G, cfg, net.architecture, data)
    text = system.to_text()
    assert text.count("\n") == 1 + 4 + 1 and "[nonzero]" in text
    js = system.to_json()
    assert len(js["constraints"]) == 4 and js["nonzero"] == system.nonzero


def test_parameter_values_names(single):
    net = single[0]
    vals = parameter_values(net)
    assert len(vals) == 2 + 1 + 1 + 1


@pytest.fixture(scope="module")
def identifiable():
    net, _ = build_identifiable((2, 2, 2, 1), seed=0, verify=False)
    return (net,) + setup(net)


def test_identifiable_fiber(identifiable):
    net, an, G, cfg, data = identifiable
    system = emit_configuration_system(an.bc, G, cfg, net.architecture, data)
    c = system.counts()
    assert c["alignment"] == 2 * c["offset"] and c["weight"] == c["nonzero"] == c["offset"]
    assert verify_membership(net, G, cfg, data)
    assert membership_by_substitution(system, net, G, cfg, data)
    W = [[list(r) for r in M] for M in net.weights]
    W[2][0][1] += F(1, 1000)
    bad = Network(W, net.biases)
    assert not verify_membership(bad, G, cfg, data)
    assert not membership_by_substitution(system, bad, G, cfg, data)
    configs, truncated = enumerate_configurations(G, net.architecture)
    assert len(configs) == 1 and not truncated


def test_walked_parameters_stay_in_fiber():
    net, block, _ = build_minimal_nonidentifiable((2, 2, 4, 2), seed=0)
    an, G, cfg, data = setup(net)
    system = emit_configuration_system(an.bc, G, cfg, net.architecture, data)
    walked = gl2_fiber_walk(net, block, [[F(3, 2), F(1, 4)], [F(1, 8), 1]])
    assert verify_membership(walked, G, cfg, data)
    assert membership_by_substitution(system, walked, G, cfg, data)
