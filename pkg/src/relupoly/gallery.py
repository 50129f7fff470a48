"""Small hand-made networks used in the tests, the CLI demos and the README."""
from __future__ import annotations

from fractions import Fraction as F

from .net import Network


def min_max_realizations() -> list:
    """Three parameters of shape (2,2,2,1) / (2,2,1,1) realizing min{0, max{x2 - x1 + 1, -x2}}."""
    r1 = Network([[[1, 0], [0, 1]], [[1, -1], [1, -2]], [[-1, 1]]],
                 [[0, 0], [-1, -1], [0]])
    r2 = Network([[[1, 1], [1, -1]], [[F(1, 2), F(-1, 2)], [F(1, 2), F(-3, 2)]], [[-1, 1]]],
                 [[0, -1], [F(-1, 2), F(-1, 2)], [0]])
    r3 = Network([[[0, 1], [-1, 2]], [[1, -1]], [[-1]]],
                 [[1, 1], [-1], [0]])
    return [r1, r2, r3]


def min_max_formula(x):
    x1, x2 = x
    return min(F(0), max(x2 - x1 + 1, -x2))


def bent_corner_net() -> Network:
    """Coordinate axes in layer 1 and one layer-2 neuron whose zero set bends at (0,2) and (3,0)."""
    return Network([[[1, 0], [0, 1]], [[2, 3]], [[1]]], [[0, 0], [-6], [0]])


def crossing_pair_net() -> Network:
    """Two layer-2 curves that cross; the x-axis piece between them carries zero weight."""
    return Network([[[1, 0], [0, 1]], [[F(-32, 15), -1], [F(19, 18), 2]], [[1, 1]]],
                   [[0, 0], [F(8, 5), F(-19, 10)], [0]])


def bending_ridges_net() -> Network:
    """Two crossing layer-2 curves with non-bending, 4-facet and 3-facet bending ridges."""
    return Network([[[1, 0], [0, 1]], [[F(-7, 3), -1], [F(6, 7), 2]], [[1, 1]]],
                   [[0, 0], [F(7, 4), F(-3, 2)], [0]])


def nested_pair_net() -> Network:
    """Two non-crossing layer-2 curves whose active sides cover the plane (transparent layer)."""
    return Network([[[1, 0], [0, 1]], [[F(-8, 9), -1], [F(38, 15), 2]], [[1, 1]]],
                   [[0, 0], [F(8, 5), F(-19, 10)], [0]])


def triple_point_net() -> Network:
    """A layer-2 bent hyperplane through the crossing of two layer-1 lines."""
    return Network([[[0, 1], [-1, 0], [1, 1]], [[1, 2, 1]], [[1]]],
                   [[0, 0, 1], [-2], [0]])


def three_lines_net() -> Network:
    """One hidden layer whose three lines form a triangle."""
    return Network([[[1, 0], [0, 1], [1, 1]], [[1, 2, -1]]], [[0, 0, -1], [0]])


def missing_pair_net() -> Network:
    """Transparent two-curve layer whose first curve leaves the box before reaching the x1-axis."""
    return Network([[[1, 0], [0, 1]], [[F(-1, 6), -1], [F(38, 15), 2]], [[1, 1]]],
                   [[0, 0], [F(8, 5), F(-19, 10)], [0]])
