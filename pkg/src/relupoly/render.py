"""Planar pictures of canonical complexes, written as deterministic SVG.

First-layer bent hyperplanes are drawn black, later layers alternate red
and blue.  Facets with zero tropical weight are dashed, ridges of the
breakpoint complex are dots.  Inputs of dimension three or more are drawn
on an affine 2D slice.
"""
from __future__ import annotations

import io
import math
from fractions import Fraction

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.patches import Polygon  # noqa: E402

from .arrangement import vertices  # noqa: E402
from .linalg import mat_vec, vec  # noqa: E402
from .net import Network  # noqa: E402

plt.rcParams["svg.hashsalt"] = "relupoly"
plt.rcParams["svg.fonttype"] = "none"

FILL = ["#f3f3f3", "#e4e9f2", "#f2ebe2", "#e6f0e6", "#efe6f0", "#f0f0e0"]


def layer_color(l: int) -> str:
    if l == 1:
        return "black"
    return "red" if l % 2 == 0 else "blue"


def slice_network(net: Network, origin, u, v) -> Network:
    """The network restricted to the plane origin + s u + t v, as a function of (s, t)."""
    origin, u, v = vec(origin), vec(u), vec(v)
    d = net.input_dim
    if not len(origin) == len(u) == len(v) == d:
        raise ValueError(f"slice vectors must have length {d}")
    W, b = net.weights[0], net.biases[0]
    W2 = [[sum(r[k] * u[k] for k in range(d)), sum(r[k] * v[k] for k in range(d))] for r in W]
    b2 = [c + x for c, x in zip(b, mat_vec(W, origin))]
    return Network([W2] + list(net.weights[1:]), [b2] + list(net.biases[1:]))


def default_slice(d: int):
    """The (x1, x2) coordinate plane through the origin."""
    zero = [Fraction(0)] * d
    u, v = list(zero), list(zero)
    u[0], v[1] = Fraction(1), Fraction(1)
    return zero, u, v


def parse_slice(text: str, d: int):
    """'o1,..,od;u1,..,ud;v1,..,vd' -> (origin, u, v)."""
    parts = text.split(";")
    if len(parts) != 3:
        raise ValueError("slice must be 'origin;u;v' with comma-separated coordinates")
    vecs = [vec(p.split(",")) for p in parts]
    if any(len(x) != d for x in vecs):
        raise ValueError(f"slice vectors must have length {d}")
    return tuple(vecs)


def _polygon(poly):
    pts = [tuple(float(c) for c in p) for p in vertices(poly)]
    if len(pts) < 3:
        return pts
    cx = sum(p[0] for p in pts) / len(pts)
    cy = sum(p[1] for p in pts) / len(pts)
    return sorted(pts, key=lambda p: math.atan2(p[1] - cy, p[0] - cx))


def _segment(poly):
    pts = [tuple(float(c) for c in p) for p in vertices(poly)]
    if len(pts) < 2:
        return None
    a = min(pts)
    b = max(pts)
    return a, b


def figure(cx, bc=None, title=None, label_regions=True):
    """A matplotlib figure of a planar complex (bc adds weight styling and ridge dots)."""
    if cx.dim != 2:
        raise ValueError("only planar complexes can be drawn; slice the network first")
    fig, ax = plt.subplots(figsize=(5, 5))
    for r in cx.regions:
        pts = _polygon(r.polyhedron(2))
        if len(pts) >= 3:
            ax.add_patch(Polygon(pts, closed=True, facecolor=FILL[r.index % len(FILL)],
                                 edgecolor="none", zorder=0))
            if label_regions:
                S = r.active
                text = "|".join("".join(str(j + 1) for j in s) or "-" for s in S)
                x, y = (float(c) for c in r.point)
                ax.text(x, y, text, fontsize=6, ha="center", va="center", color="#555555")
    zero = set() if bc is None else set(bc.weights) - set(bc.facets)
    for f in cx.facets:
        seg = _segment(f.poly)
        if seg is None:
            continue
        layer = min(l for l, _ in f.neurons) if f.neurons else 1
        style = "--" if f.index in zero else "-"
        (x0, y0), (x1, y1) = seg
        ax.plot([x0, x1], [y0, y1], style, color=layer_color(layer), lw=1.6, zorder=2)
    if bc is not None:
        for i in bc.ridges:
            x, y = (float(c) for c in cx.ridges[i].point)
            ax.plot([x], [y], "o", color="#333333", ms=3, zorder=3)
    corners = [tuple(float(c) for c in p) for p in vertices(cx.domain)]
    ax.set_xlim(min(p[0] for p in corners), max(p[0] for p in corners))
    ax.set_ylim(min(p[1] for p in corners), max(p[1] for p in corners))
    ax.set_aspect("equal")
    ax.set_xlabel("$x_1$")
    ax.set_ylabel("$x_2$")
    if title:
        ax.set_title(title, fontsize=9)
    fig.tight_layout()
    return fig


def render_svg(cx, bc=None, title=None, label_regions=True) -> str:
    fig = figure(cx, bc, title, label_regions)
    buf = io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    return buf.getvalue()
