"""Hypothesis strategies shared by the test modules."""
from fractions import Fraction

from hypothesis import strategies as st

from relupoly.net import Network

small = st.fractions(min_value=-3, max_value=3, max_denominator=8)
nonzero = small.filter(lambda q: q != 0)


def vectors(n, elems=small):
    return st.lists(elems, min_size=n, max_size=n)


def matrices(r, c, elems=small):
    return st.lists(vectors(c, elems), min_size=r, max_size=r)


@st.composite
def networks(draw, archs=((2, 2, 1), (2, 3, 1), (2, 2, 2, 1), (2, 3, 2))):
    arch = draw(st.sampled_from(archs))
    Ws = [draw(matrices(arch[l], arch[l - 1], nonzero)) for l in range(1, len(arch))]
    bs = [draw(vectors(arch[l])) for l in range(1, len(arch))]
    return Network(Ws, bs)


def points(d, R=5):
    return vectors(d, st.fractions(min_value=-R, max_value=R, max_denominator=64))


def F(v):
    return Fraction(v)
