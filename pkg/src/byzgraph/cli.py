"""Command-line front end tying generators, checkers, and the simulator
together.

Subcommands: ``gen`` (write a family graph), ``check`` (feasibility verdict),
``run`` (one consensus execution with monitors), ``equiv`` (campaign the two
checker forms against each other), ``export`` (render a graph to DOT / PNG /
CSV).  Exit codes: 0 success or satisfied, 1 semantic negative (violated,
checker disagreement, monitor failure), 2 usage (bad flags, bad parameters,
unreadable files).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from typing import Optional

from .condition import (
    check_arrow_condition,
    check_propagation_condition,
    iter_fuzz_graphs,
)
from .digraph import DiGraph, graph_dumps, graph_from_dot, graph_loads, graph_to_dot
from .generators import FamilySpec
from .simulator.adversaries import (
    Adversary,
    EquivocateStrategy,
    FlipStrategy,
    RandomStrategy,
    SilentStrategy,
    SplitBrainStrategy,
)
from .simulator.runner import run as _run_consensus

_STRATEGIES = {
    "honest": Adversary,
    "silent": SilentStrategy,
    "flip": FlipStrategy,
    "equivocate": EquivocateStrategy,
    "split-brain": SplitBrainStrategy,
    "random": RandomStrategy,
}


class _UsageError(Exception):
    """Raised for anything the user can fix on the command line; exit 2."""


def _default_jobs() -> int:
    raw = os.environ.get("BYZGRAPH_JOBS", "")
    try:
        return max(1, int(raw)) if raw else 1
    except ValueError:
        return 1


def _load_graph(path: str) -> DiGraph:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise _UsageError(f"cannot read graph file {path!r}: {exc}") from exc
    try:
        if text.lstrip().startswith("digraph"):
            return graph_from_dot(text)
        return graph_loads(text)
    except (ValueError, KeyError) as exc:
        raise _UsageError(f"cannot parse graph file {path!r}: {exc}") from exc


def _parse_bits(spec: str, g: DiGraph) -> list[int]:
    toks = [t.strip() for t in spec.split(",") if t.strip()]
    if len(toks) != g.n:
        raise _UsageError(
            f"--inputs needs {g.n} comma-separated bits, got {len(toks)}")
    try:
        vals = [int(t) for t in toks]
    except ValueError:
        raise _UsageError(f"--inputs must be bits, got {spec!r}") from None
    if any(b not in (0, 1) for b in vals):
        raise _UsageError(f"--inputs must be bits, got {spec!r}")
    return vals


def _parse_nodes(spec: Optional[str], g: DiGraph) -> tuple[int, ...]:
    if not spec:
        return ()
    out = []
    for tok in spec.split(","):
        tok = tok.strip()
        if not tok:
            continue
        if tok in g.names:
            out.append(g.node_id(tok))
        elif tok.isdigit() and int(tok) < g.n:
            out.append(int(tok))
        else:
            raise _UsageError(f"unknown node {tok!r}")
    return tuple(out)


def _emit(args, payload: dict, text_lines: list[str]) -> None:
    if args.json:
        print(json.dumps(payload, sort_keys=True))
    else:
        for line in text_lines:
            print(line)


# -- figure rendering --------------------------------------------------------


def _render_graph_png(g: DiGraph, path: str) -> None:
    """Circular layout with arrowheads pulled off the node disks."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    pos = {}
    for u in range(g.n):
        a = 2 * math.pi * u / g.n - math.pi / 2
        pos[u] = (math.cos(a), math.sin(a))
    fig, ax = plt.subplots(figsize=(6, 6))
    for (u, v) in sorted(g.edges):
        ax.annotate("", xy=pos[v], xytext=pos[u],
                    arrowprops=dict(arrowstyle="-|>", color="0.55",
                                    lw=0.8, shrinkA=14, shrinkB=14))
    for u, (x, y) in pos.items():
        ax.plot([x], [y], "o", ms=20, color="#38618c", zorder=3)
        ax.text(x, y, g.names[u], ha="center", va="center",
                color="white", fontsize=8, zorder=4)
    ax.set_xlim(-1.25, 1.25)
    ax.set_ylim(-1.25, 1.25)
    ax.set_aspect("equal")
    ax.axis("off")
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def _render_equiv_png(rows: list[dict], path: str) -> None:
    """Stacked bars per edge count: satisfied / violated / disagreeing."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    from collections import Counter

    sat, unsat, dis = Counter(), Counter(), Counter()
    for row in rows:
        m = row["edges"]
        if row["propagation"] != row["arrow"]:
            dis[m] += 1
        elif row["propagation"]:
            sat[m] += 1
        else:
            unsat[m] += 1
    xs = sorted(set(sat) | set(unsat) | set(dis))
    lo = [unsat[m] for m in xs]
    hi = [sat[m] for m in xs]
    bad = [dis[m] for m in xs]
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.bar(xs, lo, label="violated", color="#c17f7f")
    ax.bar(xs, hi, bottom=lo, label="satisfied", color="#6da06f")
    if any(bad):
        ax.bar(xs, bad, bottom=[a + b for a, b in zip(lo, hi)],
               label="disagree", color="#222222")
    ax.set_xlabel("edge count")
    ax.set_ylabel("graphs")
    ax.set_title("checker agreement by edge count")
    ax.legend()
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


# -- subcommands -------------------------------------------------------------


def _cmd_gen(args) -> int:
    family = args.family
    need = {"two-clique": ("f",), "clique-sink": ("k",),
            "random": ("n", "p"), "complete": ("n",)}[family]
    for knob in need:
        if getattr(args, knob) is None:
            raise _UsageError(f"family {family!r} needs --{knob}")
    spec = FamilySpec(family=family, f=args.f, k=args.k, n=args.n,
                      p=args.p, seed=args.seed)
    try:
        g = spec.build()
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc

    written = []
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(graph_dumps(g) + "\n")
        written.append(args.out)
    if args.dot:
        with open(args.dot, "w", encoding="utf-8") as fh:
            fh.write(graph_to_dot(g))
        written.append(args.dot)
    if args.png:
        _render_graph_png(g, args.png)
        written.append(args.png)

    payload = {"family": family, "n": g.n, "m": len(g.edges),
               "written": written}
    lines = [f"generated {family} graph: {g.n} nodes, {len(g.edges)} edges"]
    if not args.out:
        payload["graph"] = json.loads(graph_dumps(g))
        if not args.json:
            lines.append(graph_dumps(g))
    lines += [f"wrote {p}" for p in written]
    _emit(args, payload, lines)
    return 0


def _cmd_check(args) -> int:
    g = _load_graph(args.graph)
    if args.f < 0:
        raise _UsageError("f must be non-negative")
    try:
        verdicts = {}
        if args.method in ("partition", "both"):
            verdicts["partition"] = check_propagation_condition(
                g, args.f, jobs=args.jobs)
        if args.method in ("arrow", "both"):
            verdicts["arrow"] = check_arrow_condition(g, args.f)
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc

    primary = verdicts.get("partition", verdicts.get("arrow"))
    agree = len({v.satisfied for v in verdicts.values()}) == 1

    lines = ["satisfied" if primary.satisfied else "violated"]
    for name, v in verdicts.items():
        lines.append(f"{name}: {'satisfied' if v.satisfied else 'violated'}, "
                     f"{v.partitions_examined} partitions examined"
                     + (f", screened by {v.screened}" if v.screened else ""))
        if args.witness and v.witness is not None:
            for part, members in v.witness.to_json_obj(g).items():
                lines.append(f"  witness {part}: {', '.join(members) or '-'}")
    if not agree:
        lines.append("checkers disagree (this is a bug)")
    payload = {name: v.to_json_obj(g) for name, v in verdicts.items()}
    payload["satisfied"] = primary.satisfied
    _emit(args, payload, lines)
    if not agree:
        return 1
    return 0 if primary.satisfied else 1


def _cmd_run(args) -> int:
    g = _load_graph(args.graph)
    if args.f < 0:
        raise _UsageError("f must be non-negative")
    inputs = _parse_bits(args.inputs, g)
    faulty = _parse_nodes(args.faulty, g)
    if len(faulty) > args.f:
        raise _UsageError(
            f"{len(faulty)} faulty nodes exceed the bound f={args.f}")

    verdict = check_propagation_condition(g, args.f, jobs=args.jobs)
    if not verdict.satisfied:
        detail = (verdict.witness.to_json_obj(g)
                  if verdict.witness is not None else None)
        if args.json:
            print(json.dumps({"refused": True, "witness": detail},
                             sort_keys=True))
        else:
            print(f"refused: graph violates the feasibility condition "
                  f"for f={args.f}")
            if detail:
                for part, members in detail.items():
                    print(f"  witness {part}: {', '.join(members) or '-'}")
        return 1

    adv = _STRATEGIES[args.strategy](faulty)
    report = _run_consensus(g, args.f, inputs, adv, seed=args.seed,
                            engine=args.engine, check=False)
    if args.transcript:
        report.transcript.write(args.transcript)

    decisions = {g.names[u]: v for u, v in sorted(report.decisions.items())}
    monitors = [{"name": v.name, "ok": v.ok, "detail": v.detail}
                for v in report.verdicts]
    rounds = report.transcript.result()["rounds"]
    payload = {"decisions": decisions, "monitors": monitors,
               "rounds": rounds, "ok": report.ok,
               "engine": report.transcript.header["engine"]}
    lines = ["decisions: " + " ".join(f"{k}={v}" for k, v in decisions.items())]
    for m in monitors:
        status = "pass" if m["ok"] else f"FAIL ({m['detail']})"
        lines.append(f"monitor {m['name']}: {status}")
    lines.append(f"rounds: {rounds}")
    if args.transcript:
        lines.append(f"wrote {args.transcript}")
        payload["transcript"] = args.transcript
    _emit(args, payload, lines)
    return 0 if report.ok else 1


def _cmd_equiv(args) -> int:
    mode = "exhaustive" if args.exhaustive else "random"
    try:
        graphs = iter_fuzz_graphs(args.n, mode, args.trials, args.seed)
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc

    keep_rows = bool(args.csv or args.png)
    rows = []
    checked = 0
    disagreement = None
    for idx, g in enumerate(graphs):
        a = check_propagation_condition(g, args.f, screen=False)
        b = check_arrow_condition(g, args.f)
        checked += 1
        if keep_rows:
            rows.append({"index": idx, "edges": len(g.edges),
                         "propagation": a.satisfied, "arrow": b.satisfied})
        if a.satisfied != b.satisfied and disagreement is None:
            disagreement = {"index": idx, "edges": sorted(g.edges),
                            "propagation": a.satisfied, "arrow": b.satisfied}

    written = []
    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["index", "n", "f", "edges", "propagation", "arrow",
                        "agree"])
            for row in rows:
                w.writerow([row["index"], args.n, args.f, row["edges"],
                            int(row["propagation"]), int(row["arrow"]),
                            int(row["propagation"] == row["arrow"])])
        written.append(args.csv)
    if args.png:
        _render_equiv_png(rows, args.png)
        written.append(args.png)

    n_dis = 0 if disagreement is None else 1
    payload = {"n": args.n, "f": args.f, "mode": mode, "checked": checked,
               "disagreement": disagreement, "written": written}
    lines = [f"checked {checked} graphs ({mode}, n={args.n}, f={args.f}): "
             + ("no disagreements" if disagreement is None
                else f"DISAGREEMENT at index {disagreement['index']}")]
    lines += [f"wrote {p}" for p in written]
    _emit(args, payload, lines)
    return 1 if n_dis else 0


def _cmd_export(args) -> int:
    g = _load_graph(args.graph)
    written = []
    if args.dot:
        with open(args.dot, "w", encoding="utf-8") as fh:
            fh.write(graph_to_dot(g))
        written.append(args.dot)
    if args.png:
        _render_graph_png(g, args.png)
        written.append(args.png)
    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["tail", "head"])
            for (u, v) in sorted(g.edges):
                w.writerow([g.names[u], g.names[v]])
        written.append(args.csv)

    payload = {"n": g.n, "m": len(g.edges), "nodes": list(g.names),
               "written": written}
    lines = [f"graph: {g.n} nodes, {len(g.edges)} edges",
             "nodes: " + ", ".join(g.names)]
    lines += [f"wrote {p}" for p in written]
    _emit(args, payload, lines)
    return 0


# -- parser wiring -----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="byzgraph",
        description="Byzantine consensus feasibility and simulation on "
                    "directed graphs.")
    sub = p.add_subparsers(dest="cmd", required=True)

    sp = sub.add_parser("gen", help="generate a family graph")
    sp.add_argument("--family", required=True,
                    choices=["two-clique", "clique-sink", "random",
                             "complete"])
    sp.add_argument("--f", type=int, help="fault bound knob (two-clique)")
    sp.add_argument("--k", type=int, help="clique size knob (clique-sink)")
    sp.add_argument("--n", type=int, help="node count knob (random/complete)")
    sp.add_argument("--p", type=float, help="edge probability knob (random)")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", help="write graph JSON here (default: stdout)")
    sp.add_argument("--dot", help="also write a DOT rendering")
    sp.add_argument("--png", help="also write a PNG rendering")
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(fn=_cmd_gen)

    sp = sub.add_parser("check", help="decide consensus feasibility")
    sp.add_argument("graph")
    sp.add_argument("--f", type=int, required=True)
    sp.add_argument("--method", choices=["partition", "arrow", "both"],
                    default="partition")
    sp.add_argument("--witness", action="store_true",
                    help="print the violating partition, if any")
    sp.add_argument("--jobs", type=int, default=_default_jobs(),
                    help="worker processes (default: $BYZGRAPH_JOBS or 1)")
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(fn=_cmd_check)

    sp = sub.add_parser("run", help="execute one consensus run")
    sp.add_argument("graph")
    sp.add_argument("--f", type=int, required=True)
    sp.add_argument("--inputs", required=True,
                    help="comma-separated bits, one per node")
    sp.add_argument("--faulty", help="comma-separated node names")
    sp.add_argument("--strategy", choices=sorted(_STRATEGIES),
                    default="honest")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--engine", choices=["auto", "fast", "full"],
                    default="auto")
    sp.add_argument("--transcript", help="write the JSON-lines transcript")
    sp.add_argument("--jobs", type=int, default=_default_jobs())
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(fn=_cmd_run)

    sp = sub.add_parser("equiv",
                        help="campaign the two checker forms for agreement")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--f", type=int, default=1)
    mode = sp.add_mutually_exclusive_group()
    mode.add_argument("--exhaustive", action="store_true",
                      help="all digraphs on n nodes (n <= 4)")
    mode.add_argument("--random", action="store_true",
                      help="random graphs (default)")
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--seed", type=int, default=1)
    sp.add_argument("--csv", help="write one row per graph")
    sp.add_argument("--png", help="write an agreement-by-density figure")
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(fn=_cmd_equiv)

    sp = sub.add_parser("export", help="render a graph file")
    sp.add_argument("graph")
    sp.add_argument("--dot")
    sp.add_argument("--png")
    sp.add_argument("--csv", help="write the edge list")
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(fn=_cmd_export)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
