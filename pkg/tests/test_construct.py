import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from relupoly.checks import analyse
from relupoly.construct import (Affine, ConstructionError, SlabLayer, affine_difference_signature, build_identifiable,
                                build_minimal_nonidentifiable, compress_one_layer, gl2_fiber_walk,
                                linear_block_positive, make_slab_layer, oriented_pattern, pivot_hyperplane,
                                visible_hyperplanes)
from relupoly.depgraph import dependency_graph, layered_subgraph_check
from relupoly.linalg import canonical_hyperplane
from relupoly.lp import Polyhedron, lp_feasible
from relupoly.net import Network, equivalent_mod_symmetries

SQUARE = Polyhedron.make([((1, 0), 0), ((0, 1), 0), ((-1, 0), 1), ((0, -1), 1)])


def rational_points(n, d=2, R=8, seed=0):
    rng = random.Random(seed)
    return [tuple(F(rng.randint(-R * 1000, R * 1000), 1000) for _ in range(d)) for _ in range(n)]


# slab layers

def test_unit_square_slab():
    slab = make_slab_layer(SQUARE, ((1, 0), F(-1, 2)), 2, F(1, 10), nudge=False)
    assert slab.W == ((1, 0), (-1, 0))
    assert slab.b == (F(-45, 100), F(55, 100))
    # S(R0) = {2}, S(R1) = {1, 2}, S(R2) = {1} (0-based below)
    assert slab.orientation == [[1], [0, 1], [0]]


def test_two_neuron_slab_covers_space():
    slab = make_slab_layer(SQUARE, ((1, 0), F(-1, 2)), 2, F(1, 10), nudge=False)
    # the set where both neurons are inactive is empty in the whole plane
    both_off = Polyhedron.make([(tuple(-v for v in w), -c) for w, c in zip(slab.W, slab.b)], dim=2)
    assert lp_feasible(both_off) is None


def test_slab_layer_is_transparent():
    rng = random.Random(4)
    slab = make_slab_layer(Polyhedron.box(2, 8), ((F(1), F(1, 3)), F(1, 2)), 3, 1, rng=rng)
    net = Network([slab.W, [[1, 1, 1]]], [slab.b, [0]])
    assert len(slab.orientation) == 4
    # transparency on the box: some slab neuron is active everywhere
    for x in rational_points(300):
        assert any(v > 0 for v in net.preactivations(x)[0])


def test_slab_errors():
    with pytest.raises(ValueError):
        make_slab_layer(SQUARE, ((1, 0), F(-1, 2)), 2, 0)
    with pytest.raises(ValueError):
        make_slab_layer(SQUARE, ((1, 0), F(-1, 2)), 1, F(1, 10))
    with pytest.raises(ConstructionError):
        make_slab_layer(SQUARE, ((1, 0), F(5)), 2, F(1, 10))


def test_oriented_pattern():
    assert [sorted(oriented_pattern(3, i)) for i in range(4)] == [[2], [0, 2], [0, 1, 2], [0, 1]]


def manual_slab(W, b):
    return SlabLayer(tuple(map(tuple, W)), tuple(b), Polyhedron.box(2, 1), Affine.identity(2),
                     ((F(1), F(0)), F(-1, 2)), F(1, 10), (F(-1, 20), F(1, 20)), [], [])


def test_pivot_example():
    slab = manual_slab([[1, F(1, 100)], [-1, F(1, 100)]], [F(-45, 100), F(55, 100)])
    (a, beta), xs, ys = pivot_hyperplane(slab, points=[(F(45, 100), 0), (F(55, 100), 0)])
    assert ys == [(0, F(1, 10)), (F(1, 10), 0)]
    # H' : y1 + y2 = 1/10
    assert a[0] == a[1] and beta == -a[0] / 10
    # pullback on the middle region (both active) is y = 0
    mid = Affine.identity(2).then(slab.W, slab.b).pull(a, beta)
    assert canonical_hyperplane(*mid) == canonical_hyperplane((0, 1), 0)


def test_parallel_slab_rejected():
    slab = manual_slab([[1, 0], [-1, 0]], [F(-45, 100), F(55, 100)])
    with pytest.raises(ConstructionError):
        pivot_hyperplane(slab, points=[(F(45, 100), 0), (F(55, 100), 0)])


def test_default_pivot_points_are_on_the_slab_hyperplanes():
    slab = make_slab_layer(Polyhedron.box(2, 8), ((F(1), F(1, 3)), F(1, 2)), 2, 1, rng=random.Random(1))
    Hp, xs, ys = pivot_hyperplane(slab)
    for k, x in enumerate(xs):
        assert sum(w * v for w, v in zip(slab.W[k], x)) + slab.b[k] == 0
        assert Polyhedron.box(2, 8).contains(x, strict=True)


# identifiable construction

@pytest.mark.parametrize("arch", [(2, 2, 2, 1), (2, 3, 2, 1)])
def test_build_identifiable(arch):
    net, trail = build_identifiable(arch, seed=0)
    assert net.architecture == arch
    assert all(v.ok for v in trail.verdicts) and len(trail.verdicts) == 6
    an = analyse(net)
    G = dependency_graph(an.bc)
    assert layered_subgraph_check(G, arch) is not None
    assert len(trail.stages) == len(arch) - 2
    assert all(s.eps > 0 for s in trail.stages)


def test_one_hidden_layer_build():
    net, trail = build_identifiable((2, 3, 1), seed=2)
    names = {v.name: v.status for v in trail.verdicts}
    assert names["LRA"] == "pass" and names["cTPIC"] == "pass"


def test_width_one_rejected():
    with pytest.raises(ValueError):
        build_identifiable((2, 1, 2, 1))


def test_trail_json_has_every_polytope():
    net, trail = build_identifiable((2, 2, 2, 1), seed=3)
    data = trail.to_json()
    assert len(data["stages"]) == 2 and "final_polytope" in data
    assert all("eps" in s and s["polytope"] for s in data["stages"])


# minimal non-identifiable construction

@pytest.fixture(scope="module")
def minimal():
    return build_minimal_nonidentifiable((2, 2, 4, 2), seed=0)


def test_linear_block_positive(minimal):
    net, block, _ = minimal
    assert block.neurons == (2, 3)
    assert linear_block_positive(net, block)


def test_minimal_needs_width_four():
    with pytest.raises(ValueError):
        build_minimal_nonidentifiable((2, 2, 3, 2))


def test_walk_identity(minimal):
    net, block, _ = minimal
    assert gl2_fiber_walk(net, block, [[1, 0], [0, 1]]) == net


def test_walk_preserves_function(minimal):
    net, block, _ = minimal
    for M in ([[2, 0], [0, 1]], [[1, F(1, 8)], [0, 1]]):
        moved = gl2_fiber_walk(net, block, M)
        assert all(moved(x) == net(x) for x in rational_points(1000))
    shear = gl2_fiber_walk(net, block, [[1, F(1, 8)], [0, 1]])
    assert not equivalent_mod_symmetries(shear, net)
    assert equivalent_mod_symmetries(gl2_fiber_walk(net, block, [[2, 0], [0, 1]]), net)


def test_walk_rejects_lost_positivity(minimal):
    net, block, _ = minimal
    with pytest.raises(ConstructionError):
        gl2_fiber_walk(net, block, [[1, -100], [0, 1]])


def test_bias_shift_is_an_extra_fiber_direction(minimal):
    """Shifting the linear neurons' biases and compensating in the output bias keeps f fixed."""
    net, block, _ = minimal
    l = block.layer
    t = [F(1, 50), F(-1, 70)]
    b = list(net.biases[l - 1])
    for k, j in enumerate(block.neurons):
        b[j] += t[k]
    V = net.weights[l]
    c = [ci - sum(V[r][j] * t[k] for k, j in enumerate(block.neurons)) for r, ci in enumerate(net.biases[l])]
    moved = net.replace_layer(l, b=b).replace_layer(l + 1, b=c)
    assert linear_block_positive(moved, block)
    assert all(moved(x) == net(x) for x in rational_points(1000, seed=3))
    assert not equivalent_mod_symmetries(moved, net)


# compression and signatures

def random_one_layer(rng, n, k):
    """n neurons on distinct hyperplanes through the box, k more that are either duplicates or outside."""
    W1, b1 = [], []
    for _ in range(n):
        W1.append([F(rng.randint(-9, 9) or 1, 4), F(rng.randint(-9, 9) or 1, 4)])
        b1.append(F(rng.randint(-9, 9), 4))
    for _ in range(k):
        if rng.random() < 0.5:
            i = rng.randrange(n)
            lam = F(rng.choice([-3, -2, -1, 1, 2, 3]), 2)
            W1.append([lam * v for v in W1[i]])
            b1.append(lam * b1[i])
        else:
            W1.append([F(rng.randint(-3, 3) or 1, 4), F(rng.randint(-3, 3), 4)])
            b1.append(F(rng.choice([-1, 1]) * 40))
    W2 = [[F(rng.randint(-9, 9) or 1, 3) for _ in range(n + k)]]
    return Network([W1, W2], [b1, [F(rng.randint(-5, 5))]])


def test_compress_two_neurons_one_hyperplane():
    net = Network([[[1, 1], [-2, -2]], [[3, 5]]], [[-1, 2], [0]])
    out = compress_one_layer(net)
    assert len(visible_hyperplanes(out)) == 1
    assert all(out(x) == net(x) for x in rational_points(300))


def test_compress_already_compressed_is_identity_up_to_symmetry():
    net = Network([[[1, 0], [0, 1], [1, 1]], [[1, 2, -1]]], [[0, 0, -1], [F(1, 3)]])
    out = compress_one_layer(net)
    visible = [(tuple(W), b) for W, b in zip(out.weights[0], out.biases[0])][:3]
    assert all(out(x) == net(x) for x in rational_points(200))
    assert sorted(canonical_hyperplane(*h) for h in visible) == \
        sorted(canonical_hyperplane(W, b) for W, b in zip(net.weights[0], net.biases[0]))


@settings(max_examples=20)
@given(st.integers(1, 3), st.integers(1, 3), st.integers(0, 10 ** 6))
def test_compress_random(n, k, seed):
    net = random_one_layer(random.Random(seed), n, k)
    out = compress_one_layer(net)
    P = Polyhedron.box(2, 8)
    assert out.architecture == net.architecture
    assert all(out(x) == net(x) for x in rational_points(200, seed=seed))
    assert len(visible_hyperplanes(out, P)) == len(visible_hyperplanes(net, P))


def flip(net, i):
    """Neuron i replaced by a [-h]_+ neuron with the same tropical weight."""
    W1 = [list(r) for r in net.weights[0]]
    b1 = list(net.biases[0])
    W1[i] = [-v for v in W1[i]]
    b1[i] = -b1[i]
    return Network([W1, net.weights[1]], [b1, net.biases[1]])


def test_signature_identity_and_flips():
    theta = Network([[[1, 0], [0, 1], [1, 1]], [[2, -1, 3]]], [[0, 0, -1], [0]])
    assert affine_difference_signature(theta, theta) == (0, 0, 0)
    for planted in [(1, 0, 0), (0, 1, 1), (1, 1, 1)]:
        eta = theta
        for i, a in enumerate(planted):
            if a:
                eta = flip(eta, i)
        assert affine_difference_signature(theta, eta) == planted


def test_signature_rejects_weight_mismatch():
    theta = Network([[[1, 0], [0, 1]], [[2, -1]]], [[0, 0], [0]])
    eta = Network([[[1, 0], [0, 1]], [[3, -1]]], [[0, 0], [0]])
    with pytest.raises(ValueError):
        affine_difference_signature(theta, eta)
