"""Command line entry point: ``hierflow {solve,approx,hierarchy,verify}``.

Exit codes: 0 success, 1 infeasible flow or failed verification, 2 parse error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .driver import VerificationError, approx_maxflow, exact_maxflow
from .graph import DimacsError, flow_from_json, flow_to_json, parse_dimacs, verify_st_flow
from .hierarchy_builder import build_hierarchy, get_profile

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_PARSE = 2


def _seed(arg: int | None) -> int:
    if arg is not None:
        return arg
    env = os.environ.get("HIERFLOW_SEED")
    return int(env) if env else 0


def _load(path: str):
    data = sys.stdin.buffer.read() if path == "-" else Path(path).read_bytes()
    return parse_dimacs(data)


def _write(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def hierarchy_dump(g, bh) -> dict:
    """JSON-ready view of a built hierarchy."""
    h = bh.final_hierarchy
    sg = bh.final_sg
    stars = []
    for k, (lvl, comp) in enumerate(sg.star_keys):
        leaves = [(leaf, sg.graph.caps[g.m + j]) for j, (kk, leaf, d) in enumerate(sg.star_edges)
                  if kk == k and d == 0]
        stars.append({"level": lvl, "component": comp, "size": sg.star_size[k],
                      "leaves": [{"vertex": v, "capacity": c} for v, c in leaves]})
    return {
        "n": g.n,
        "m": g.m,
        "L": h.L,
        "L_nominal": bh.L_nominal,
        "q": bh.q,
        "z": bh.z,
        "levels": list(h.levels),
        "components": [list(c) for c in h.comp],
        "tau": list(sg.order.tau),
        "stars": stars,
        "round_capacities": bh.round_capacities(),
    }


def _cmd_solve(args) -> int:
    g, s, t = _load(args.file)
    profile = get_profile(args.profile)
    try:
        rep = exact_maxflow(g, s, t, profile, _seed(args.seed), assert_level=args.assert_level)
    except VerificationError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_INVALID
    print(f"value {rep.value}")
    if args.json:
        _write(args.json, flow_to_json(g, rep.flow, rep.value, 1))
    if args.report:
        _write(args.report, json.dumps(rep.summary(), indent=1, sort_keys=True) + "\n")
    return EXIT_OK


def _cmd_approx(args) -> int:
    g, s, t = _load(args.file)
    profile = get_profile(args.profile)
    res = approx_maxflow(g, s, t, profile, _seed(args.seed), check=args.assert_level != "off")
    if args.assert_level != "off":
        problem = verify_st_flow(g, s, t, res.value, 1, list(g.edges_with(res.flow)))
        if problem or not res.unfold_ok:
            print(f"verification failed: {problem or res.unfold_reason}", file=sys.stderr)
            return EXIT_INVALID
    print(f"value {res.value}")
    print(f"cut_capacity {res.cut_capacity}")
    if args.json:
        _write(args.json, flow_to_json(g, res.flow, res.value, 1))
    return EXIT_OK


def _cmd_hierarchy(args) -> int:
    g, _s, _t = _load(args.file)
    bh = build_hierarchy(g, get_profile(args.profile), _seed(args.seed))
    _write(args.dump, json.dumps(hierarchy_dump(g, bh), indent=1, sort_keys=True) + "\n")
    return EXIT_OK


def _cmd_verify(args) -> int:
    g, s, t = _load(args.file)
    try:
        value, scale, edges = flow_from_json(Path(args.flow).read_text())
    except (ValueError, KeyError, TypeError) as exc:
        print(f"unreadable flow file: {exc}", file=sys.stderr)
        return EXIT_PARSE
    problem = verify_st_flow(g, s, t, value, scale, edges)
    if problem:
        print(f"invalid: {problem}", file=sys.stderr)
        return EXIT_INVALID
    print(f"ok value {value} scale {scale}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hierflow", description="Exact s-t max flow on DIMACS instances.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, with_json=True):
        sp.add_argument("file", help="DIMACS max-flow file, '-' for stdin")
        sp.add_argument("--seed", type=int, default=None, help="RNG seed (default: $HIERFLOW_SEED or 0)")
        sp.add_argument("--profile", choices=("practical", "theory"), default="practical")
        sp.add_argument("--assert-level", choices=("off", "cheap", "full"), default="cheap")
        if with_json:
            sp.add_argument("--json", metavar="OUT", help="write the flow as JSON ('-' for stdout)")

    sp = sub.add_parser("solve", help="exact maximum flow")
    common(sp)
    sp.add_argument("--report", metavar="OUT", help="write the solve report as JSON")
    sp.set_defaults(func=_cmd_solve)

    sp = sub.add_parser("approx", help="single approximate round")
    common(sp)
    sp.set_defaults(func=_cmd_approx)

    sp = sub.add_parser("hierarchy", help="build and dump the expander hierarchy")
    common(sp, with_json=False)
    sp.add_argument("--dump", metavar="OUT", required=True)
    sp.set_defaults(func=_cmd_hierarchy)

    sp = sub.add_parser("verify", help="check a flow JSON against an instance")
    sp.add_argument("file")
    sp.add_argument("--flow", required=True, metavar="FLOW_JSON")
    sp.set_defaults(func=_cmd_verify)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DimacsError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"cannot read input: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
