"""The aggregate analysis report and its text rendering.

The report is a pure function of (network, box, seed, samples): timings are
only included on request, so two runs with the same inputs give the same bytes.
"""
from __future__ import annotations

import hashlib
import json
import time
from fractions import Fraction

from .checks import all_verdicts, analyse, expected_dimension, functional_dimension_estimate, identifiability_verdict
from .complex import DEFAULT_BOX
from .depgraph import dependency_graph, depth_certificate, ground_truth_layers, layered_subgraph_check, to_dot
from .linalg import fmt_rational
from .net import Network, dumps
from .tropical import weight_table

BOX_NOTE = ("facets on the working-box boundary are excluded from ridge classification, "
            "so the dependency graph is a subgraph of the ideal one and depth rejections stay sound")


def digest(net: Network) -> str:
    return hashlib.sha256(dumps(net).encode()).hexdigest()


class _Clock:
    def __init__(self, enabled):
        self.enabled = enabled
        self.times = {}
        self._t = time.perf_counter()

    def lap(self, name):
        now = time.perf_counter()
        if self.enabled:
            self.times[name] = round(now - self._t, 4)
        self._t = now


def build_report(net: Network, box=DEFAULT_BOX, seed=0, samples=200, timings=False) -> dict:
    clock = _Clock(timings)
    an = analyse(net, box)
    clock.lap("complex")
    verdicts = all_verdicts(an, seed)
    clock.lap("verdicts")
    G = dependency_graph(an.bc)
    layered = layered_subgraph_check(G, net.architecture)
    status, chain = depth_certificate(G, net.depth)
    clock.lap("dependency_graph")
    ident = identifiability_verdict(net, box, seed=seed, analysis=an)
    clock.lap("identifiability")
    js = functional_dimension_estimate(net, samples, seed, box, cx=an.cx)
    clock.lap("functional_dimension")
    report = {
        "input": {"sha256": digest(net), "architecture": list(net.architecture)},
        "seeds": {"seed": seed},
        "box": fmt_rational(Fraction(box)),
        "complex": an.cx.summary(),
        "breakpoints": {"facets": len(an.bc.facets), "ridges": len(an.bc.ridges)},
        "weights": weight_table(an.bc),
        "verdicts": [v.to_json() for v in verdicts],
        "identifiability": ident,
        "dependency_graph": {
            "vertices": len(G.vertices),
            "edges": [[u, v] for u, v in sorted(G.edges)],
            "irregular_ridges": len(G.irregular),
            "layered_subgraph": None if layered is None else [list(g) for g in layered],
            "layers": {str(k): [list(n) for n in v] for k, v in ground_truth_layers(an.bc, G).items()},
            "note": BOX_NOTE,
        },
        "depth_certificate": {"depth": net.depth, "status": status, "chain": chain},
        "functional_dimension": {
            "samples": len(js.X), "rank": js.rank, "expected": expected_dimension(net.architecture),
            "gap": None if js.gap == float("inf") else float(f"{js.gap:.6e}"),
            "singular_values": [float(f"{s:.6e}") for s in js.singular_values],
        },
    }
    if timings:
        report["timings"] = clock.times
    return report, an, G


def report_text(report: dict) -> str:
    """Human-readable, '|'-delimited summary lines."""
    out = [f"input|sha256|{report['input']['sha256']}",
           f"input|architecture|{','.join(map(str, report['input']['architecture']))}",
           f"input|box|{report['box']}",
           f"input|seed|{report['seeds']['seed']}"]
    for k, v in report["complex"].items():
        out.append(f"complex|{k}|{v}")
    for k, v in report["breakpoints"].items():
        out.append(f"breakpoints|{k}|{v}")
    for v in report["verdicts"]:
        out.append(f"verdict|{v['property']}|{v['status']}")
    out.append(f"identifiability|verdict|{report['identifiability']['verdict']}")
    dg = report["dependency_graph"]
    out.append(f"dependency_graph|vertices|{dg['vertices']}")
    out.append(f"dependency_graph|edges|{len(dg['edges'])}")
    out.append(f"dependency_graph|layered_subgraph|{'found' if dg['layered_subgraph'] is not None else 'none'}")
    dc = report["depth_certificate"]
    out.append(f"depth_certificate|L={dc['depth']}|{dc['status']} (longest chain {len(dc['chain'])})")
    fd = report["functional_dimension"]
    out.append(f"functional_dimension|rank|{fd['rank']}")
    out.append(f"functional_dimension|expected|{fd['expected']}")
    out.append(f"functional_dimension|gap|{fd['gap']}")
    for k, v in report.get("timings", {}).items():
        out.append(f"timing|{k}|{v}")
    return "\n".join(out) + "\n"


def report_files(net: Network, box=DEFAULT_BOX, seed=0, samples=200, timings=False) -> dict:
    """name -> text for report.json, report.txt, depgraph.dot and (planar input) complex.svg."""
    report, an, G = build_report(net, box, seed, samples, timings)
    files = {"report.json": json.dumps(report, indent=1, sort_keys=True) + "\n",
             "report.txt": report_text(report),
             "depgraph.dot": to_dot(G, ground_truth_layers(an.bc, G))}
    if net.input_dim == 2:
        from .render import render_svg
        files["complex.svg"] = render_svg(an.cx, an.bc, f"architecture {net.architecture}")
    return files
