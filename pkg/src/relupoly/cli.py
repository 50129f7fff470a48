"""Command-line entry point: `relupoly <subcommand> ...`.

Exit codes: 0 success, 1 a verdict failed under --strict, 2 bad input.
"""
from __future__ import annotations

import argparse
import json
import os
import random
import sys
import tempfile
from fractions import Fraction

from .linalg import fmt_rational, parse_rational, vec
from .net import ShapeError, load

CHECKS = ("genericity", "supertransversality", "cancellation", "transparency", "lra", "ctpic")


class InputError(Exception):
    pass


def write_atomic(path, text: str):
    path = os.path.abspath(path)
    folder = os.path.dirname(path)
    os.makedirs(folder, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(args, text: str):
    if args.out:
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=1) + "\n"


def _net(args):
    try:
        return load(args.net)
    except FileNotFoundError:
        raise InputError(f"no such file: {args.net}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{args.net}: malformed JSON ({exc})") from None
    except ShapeError as exc:
        raise InputError(f"{args.net}: {exc}") from None


def _box(args):
    return parse_rational(args.box)


def _points(text: str, d: int):
    pts = [vec(p.split(",")) for p in text.split(";") if p.strip()]
    if any(len(p) != d for p in pts):
        raise InputError(f"every point needs {d} coordinates")
    return pts


# subcommands

def cmd_eval(args):
    net = _net(args)
    if args.points:
        pts = _points(args.points, net.input_dim)
    else:
        rng = random.Random(args.seed)
        R = _box(args)
        pts = [tuple(R * Fraction(rng.randint(-2 ** 16, 2 ** 16), 2 ** 16) for _ in range(net.input_dim))
               for _ in range(args.samples)]
    rows = [{"x": [fmt_rational(v) for v in x], "y": [fmt_rational(v) for v in net(x)]} for x in pts]
    if args.format == "txt":
        _emit(args, "".join(f"{' '.join(r['x'])} -> {' '.join(r['y'])}\n" for r in rows))
    else:
        _emit(args, _json(rows))
    return 0


def cmd_complex(args):
    from .complex import build_complex, complex_to_json
    cx = build_complex(_net(args), _box(args), seed=args.seed)
    if args.format == "txt":
        _emit(args, "".join(f"{k}: {v}\n" for k, v in cx.summary().items()))
    else:
        _emit(args, _json(complex_to_json(cx)))
    return 0


def cmd_weights(args):
    from .checks import analyse
    from .tropical import weight_table
    an = analyse(_net(args), _box(args), seed=args.seed)
    table = weight_table(an.bc)
    if args.format == "txt":
        _emit(args, "".join(f"{k}: w={v['w']} n={v['n']} norm2={v['norm2']}\n" for k, v in table.items()))
    else:
        _emit(args, _json(table))
    return 0


def cmd_breakpoints(args):
    from .checks import analyse
    an = analyse(_net(args), _box(args), seed=args.seed)
    cx, bc = an.cx, an.bc
    q = fmt_rational
    data = {
        "facets": [{"id": i, "normal": [q(v) for v in cx.facets[i].hyperplane[0]],
                    "offset": q(cx.facets[i].hyperplane[1]), "point": [q(v) for v in cx.facets[i].point],
                    "neurons": [list(n) for n in cx.facets[i].neurons], "box_clipped": cx.facets[i].box_clipped,
                    "weight": bc.weights[i].to_json()} for i in bc.facets],
        "ridges": [{"id": r, "point": [q(v) for v in cx.ridges[r].point], "facets": bc.star(r)} for r in bc.ridges],
    }
    if args.format == "txt":
        lines = [f"facet {f['id']}: {f['normal']}.x + {f['offset']} = 0 neurons {f['neurons']}" for f in data["facets"]]
        lines += [f"ridge {r['id']}: point {r['point']} facets {r['facets']}" for r in data["ridges"]]
        _emit(args, "\n".join(lines) + "\n")
    else:
        _emit(args, _json(data))
    return 0


def cmd_depgraph(args):
    from .checks import analyse
    from .depgraph import dependency_graph, depth_certificate, ground_truth_layers, to_dot
    net = _net(args)
    an = analyse(net, _box(args), seed=args.seed)
    G = dependency_graph(an.bc)
    labels = ground_truth_layers(an.bc, G)
    if args.format == "json":
        status, chain = depth_certificate(G, args.depth or net.depth)
        _emit(args, _json({"vertices": [sorted(g) for g in G.vertices],
                           "edges": [{"from": u, "to": v, "ridges": rs} for (u, v), rs in sorted(G.edges.items())],
                           "layers": {str(k): [list(n) for n in v] for k, v in labels.items()},
                           "depth_certificate": {"depth": args.depth or net.depth, "status": status, "chain": chain}}))
    else:
        _emit(args, to_dot(G, labels))
    return 0


def cmd_check(args):
    from .checks import (analyse, cancellation_free_check, ctpic_check, genericity_check, identifiability_verdict,
                         lra_verdict, supertransversality_check, transparency_verdict)
    net = _net(args)
    box = _box(args)
    wanted = set(CHECKS) if args.all or not any(getattr(args, c) for c in CHECKS) else \
        {c for c in CHECKS if getattr(args, c)}
    an = analyse(net, box, seed=args.seed)
    cx, bc = an.cx, an.bc
    run = {"genericity": lambda: genericity_check(cx, args.seed),
           "supertransversality": lambda: supertransversality_check(cx),
           "cancellation": lambda: cancellation_free_check(cx, bc.weights),
           "transparency": lambda: transparency_verdict(cx),
           "lra": lambda: lra_verdict(cx, None, bc.weights),
           "ctpic": lambda: ctpic_check(bc)}
    verdicts = [run[c]() for c in CHECKS if c in wanted]
    out = {"architecture": list(net.architecture), "box": fmt_rational(box), "seed": args.seed,
           "verdicts": [v.to_json() for v in verdicts]}
    if args.all:
        out["identifiability"] = identifiability_verdict(net, box, seed=args.seed, analysis=an)
    if args.format == "txt":
        _emit(args, "".join(f"{v.name}: {v.status}\n" for v in verdicts))
    else:
        _emit(args, _json(out))
    if args.strict and not all(v.ok for v in verdicts):
        return 1
    return 0


def _arch(text):
    try:
        arch = tuple(int(v) for v in text.split(","))
    except ValueError:
        raise InputError(f"architecture must be comma-separated integers, got {text!r}") from None
    return arch


def cmd_construct(args):
    from .construct import ConstructionError, build_identifiable, build_minimal_nonidentifiable
    from .net import dumps
    arch = _arch(args.arch)
    eps = parse_rational(args.eps)
    try:
        if args.kind == "identifiable":
            net, trail = build_identifiable(arch, _box(args), args.seed, eps)
            extra = {}
        else:
            net, block, trail = build_minimal_nonidentifiable(arch, _box(args), args.seed, eps)
            extra = {"block.json": _json(block.to_json())}
    except ValueError as exc:
        raise InputError(str(exc)) from None
    except ConstructionError as exc:
        print(f"construction failed: {exc}", file=sys.stderr)
        return 1
    out = args.out or "."
    write_atomic(os.path.join(out, "net.json"), dumps(net) + "\n")
    write_atomic(os.path.join(out, "trail.json"), _json(trail.to_json()))
    for name, text in extra.items():
        write_atomic(os.path.join(out, name), text)
    if args.strict and not all(v.ok for v in trail.verdicts):
        return 1
    return 0


def cmd_funcdim(args):
    from .checks import expected_dimension, functional_dimension_estimate
    net = _net(args)
    js = functional_dimension_estimate(net, args.samples, args.seed, _box(args))
    data = {"rank": js.rank, "expected": expected_dimension(net.architecture), "samples": len(js.X),
            "gap": None if js.gap == float("inf") else js.gap,
            "singular_values": [float(s) for s in js.singular_values]}
    if args.format == "txt":
        _emit(args, f"rank {data['rank']} expected {data['expected']} gap {data['gap']}\n")
    else:
        _emit(args, _json(data))
    return 0


def cmd_fiber(args):
    from .checks import analyse
    from .depgraph import dependency_graph
    from .fiber import (breakpoint_data, emit_configuration_system, ground_truth_configuration,
                        membership_by_substitution, verify_membership)
    net = _net(args)
    an = analyse(net, _box(args), seed=args.seed)
    G = dependency_graph(an.bc)
    config = ground_truth_configuration(an.bc, G)
    data = breakpoint_data(an.bc)
    system = emit_configuration_system(an.bc, G, config, net.architecture, data)
    member = None
    if args.against:
        other = load(args.against)
        if other.architecture != net.architecture:
            raise InputError("the candidate parameter has a different architecture")
        member = verify_membership(other, G, config, data) and \
            membership_by_substitution(system, other, G, config, data)
    if args.format == "txt":
        text = system.to_text()
        if member is not None:
            text += f"# membership of {args.against}: {member}\n"
        _emit(args, text)
    else:
        out = {"configuration": config.to_json(), "counts": system.counts(), "system": system.to_json()}
        if member is not None:
            out["membership"] = member
        _emit(args, _json(out))
    if args.strict and member is False:
        return 1
    return 0


def cmd_render(args):
    from .complex import build_complex
    from .render import default_slice, parse_slice, render_svg, slice_network
    from .tropical import breakpoint_complex
    net = _net(args)
    title = os.path.basename(args.net)
    if net.input_dim != 2 or args.slice:
        try:
            origin, u, v = parse_slice(args.slice, net.input_dim) if args.slice else default_slice(net.input_dim)
        except ValueError as exc:
            raise InputError(str(exc)) from None
        net = slice_network(net, origin, u, v)
        fmt = lambda w: ",".join(fmt_rational(c) for c in w)  # noqa: E731
        title += f" on slice {fmt(origin)};{fmt(u)};{fmt(v)}"
    cx = build_complex(net, _box(args), seed=args.seed)
    _emit(args, render_svg(cx, breakpoint_complex(cx), title))
    return 0


def cmd_report(args):
    from .report import report_files
    files = report_files(_net(args), _box(args), args.seed, args.samples, args.timings)
    if not args.out:
        sys.stdout.write(files["report.txt"])
        return 0
    for name, text in files.items():
        write_atomic(os.path.join(args.out, name), text)
    return 0


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--box", default="8", help="half-width R of the working box [-R, R]^d")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="output path (directory for construct/report)")
    common.add_argument("--format", choices=("json", "dot", "svg", "txt"), default=None)
    common.add_argument("--strict", action="store_true", help="exit 1 when a verdict fails")

    p = argparse.ArgumentParser(prog="relupoly", description="Exact analysis of ReLU network parameters.")
    sub = p.add_subparsers(dest="command", required=True)

    def net_cmd(name, fn, help_):
        s = sub.add_parser(name, parents=[common], help=help_)
        s.add_argument("net", help="network JSON file")
        s.set_defaults(fn=fn)
        return s

    s = net_cmd("eval", cmd_eval, "evaluate exactly at given or random rational points")
    s.add_argument("--points", help="'x1,x2;y1,y2;...'")
    s.add_argument("--samples", type=int, default=10)
    net_cmd("complex", cmd_complex, "canonical polyhedral complex in the box")
    net_cmd("weights", cmd_weights, "tropical weight table")
    net_cmd("breakpoints", cmd_breakpoints, "breakpoint complex")
    s = net_cmd("depgraph", cmd_depgraph, "dependency graph (DOT or JSON)")
    s.add_argument("--depth", type=int, help="depth L' for the certificate (default: the network's depth)")
    s = net_cmd("check", cmd_check, "identifiability verdicts")
    s.add_argument("--all", action="store_true", help="all six verdicts plus the identifiability summary")
    for c in CHECKS:
        s.add_argument(f"--{c}", action="store_true")
    s = net_cmd("funcdim", cmd_funcdim, "numerical functional dimension")
    s.add_argument("--samples", type=int, default=200)
    s = net_cmd("fiber", cmd_fiber, "configuration-variety equations for the ground-truth configuration")
    s.add_argument("--against", help="another network JSON to test for membership")
    s = net_cmd("render", cmd_render, "SVG picture of the complex")
    s.add_argument("--slice", help="'origin;u;v' affine plane for inputs of dimension >= 3")
    s = net_cmd("report", cmd_report, "aggregate analysis report")
    s.add_argument("--samples", type=int, default=200)
    s.add_argument("--timings", action="store_true", help="include wall-clock timings (breaks byte-identity)")

    s = sub.add_parser("construct", parents=[common], help="build parameters with known verdicts")
    s.add_argument("kind", choices=("identifiable", "minimal"))
    s.add_argument("--arch", required=True, help="e.g. 2,2,2,1")
    s.add_argument("--eps", default="1/2", help="slab width as a fraction of the available slack")
    s.set_defaults(fn=cmd_construct)
    return p


DEFAULT_FORMAT = {"depgraph": "dot", "render": "svg"}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.format is None:
        args.format = DEFAULT_FORMAT.get(args.command, "json")
    try:
        return args.fn(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ShapeError, ValueError, ZeroDivisionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
