import json
import random
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, strategies as st

from relupoly.gallery import min_max_formula, min_max_realizations
from relupoly.net import (Network, ShapeError, activation_pattern, affine_map_for_pattern, apply_symmetry,
                          canonicalize, dumps, equivalent_mod_symmetries, from_json, loads, to_json)

from strategies import networks, points

R1 = min_max_realizations()[0]


def float_eval(net, x):
    a = np.array([float(v) for v in x])
    for l, (W, b) in enumerate(zip(net.weights, net.biases)):
        a = np.array([[float(v) for v in r] for r in W]) @ a + np.array([float(v) for v in b])
        if l < net.depth:
            a = np.maximum(a, 0)
    return a


def test_realization_one_values():
    assert R1((3, 1)) == (-1,)
    assert R1((0, 0)) == (0,)


def test_zero_output_weights_give_bias():
    net = Network([[[1, 2], [3, -1]], [[0, 0]]], [[1, -1], [F(7, 3)]])
    rng = random.Random(0)
    for _ in range(20):
        assert net((rng.randint(-9, 9), rng.randint(-9, 9))) == (F(7, 3),)


def test_activation_patterns():
    assert activation_pattern(R1, (3, 1)) == ((1, 1), (1, 0))
    assert activation_pattern(R1, (-1, -2))[0] == (-1, -1)
    assert 0 in activation_pattern(R1, (0, 5))[0]


def test_affine_map_examples():
    piece = affine_map_for_pattern(R1, ({0, 1}, {0}))
    assert [list(r) for r in piece.A] == [[-1, 1]]
    assert piece((3, 1)) == R1((3, 1))
    full = affine_map_for_pattern(R1, ({0, 1}, {0, 1}))
    assert [list(r) for r in full.A] == [[0, -1]]
    dead = affine_map_for_pattern(R1, (set(), {0, 1}))
    assert all(v == 0 for v in dead.A[0])


@given(networks(), points(2))
def test_exact_eval_matches_float(net, x):
    got = [float(v) for v in net(x)]
    assert np.allclose(got, float_eval(net, x), atol=1e-9)


@given(networks())
def test_json_roundtrip(net):
    assert loads(dumps(net)) == net
    assert from_json(json.loads(json.dumps(to_json(net)))) == net


def test_decimal_json_parsed_exactly():
    net = from_json({"layers": [{"W": [["0.1", "1"]], "b": ["-0.25"]}, {"W": [["1"]], "b": ["0"]}]})
    assert net.weights[0][0][0] == F(1, 10) and net.biases[0][0] == F(-1, 4)


@pytest.mark.parametrize("bad", [
    {"layers": [{"W": [[1, 2]], "b": [0, 1]}, {"W": [[1]], "b": [0]}]},
    {"layers": [{"W": [[1, 2]], "b": [0]}, {"W": [[1, 1]], "b": [0]}]},
    {"architecture": [3, 1, 1], "layers": [{"W": [[1, 2]], "b": [0]}, {"W": [[1]], "b": [0]}]},
    {"layers": [{"W": [[1, 2]]}]},
])
def test_shape_errors(bad):
    with pytest.raises(ShapeError):
        from_json(bad)


def test_scaling_preserves_function():
    net = apply_symmetry(R1, ("scale", 1, 0, 2))
    rng = random.Random(3)
    for _ in range(100):
        x = (F(rng.randint(-500, 500), 100), F(rng.randint(-500, 500), 100))
        assert net(x) == R1(x)


def test_identity_actions():
    assert apply_symmetry(R1, ("scale", 2, 1, 1)) == R1
    once = apply_symmetry(R1, ("perm", 1, [1, 0]))
    assert once != R1 and apply_symmetry(once, ("perm", 1, [1, 0])) == R1


def test_equivalence_examples():
    theta = R1
    moved = apply_symmetry(apply_symmetry(theta, ("perm", 2, [1, 0])), ("scale", 1, 1, F(5, 3)))
    assert equivalent_mod_symmetries(theta, moved)
    bias = theta.replace_layer(2, b=[-1, -2])
    assert not equivalent_mod_symmetries(theta, bias)
    # a sign flip (row and outgoing column negated) is not a trivial symmetry
    W1 = [list(r) for r in theta.weights[0]]
    b1 = list(theta.biases[0])
    W2 = [list(r) for r in theta.weights[1]]
    W1[0] = [-v for v in W1[0]]
    b1[0] = -b1[0]
    for r in W2:
        r[0] = -r[0]
    flipped = Network([W1, W2, theta.weights[2]], [b1, theta.biases[1], theta.biases[2]])
    assert not equivalent_mod_symmetries(theta, flipped)


@given(networks(), st.data())
def test_canonical_form_is_orbit_invariant(net, data):
    moved = net
    for _ in range(3):
        l = data.draw(st.integers(1, net.depth))
        n = net.architecture[l]
        if data.draw(st.booleans()):
            perm = data.draw(st.permutations(range(n)))
            moved = apply_symmetry(moved, ("perm", l, list(perm)))
        else:
            j = data.draw(st.integers(0, n - 1))
            lam = data.draw(st.fractions(min_value=F(1, 10), max_value=10))
            moved = apply_symmetry(moved, ("scale", l, j, lam))
    assert canonicalize(moved) == canonicalize(net)


def test_min_max_realizations_agree():
    rng = random.Random(11)
    nets = min_max_realizations()
    for _ in range(500):
        x = (F(rng.randint(-500, 500), 100), F(rng.randint(-500, 500), 100))
        want = min_max_formula(x)
        assert all(n(x) == (want,) for n in nets)
