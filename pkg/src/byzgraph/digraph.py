"""Immutable simple directed graphs and the graph algorithms everything else
builds on: reachability, strongly connected components, reduced graphs, source
components, and maximum families of vertex-disjoint paths with cut
certificates.

Determinism is a hard requirement throughout this package: every node must be
able to derive identical routing decisions from the topology alone, so all
algorithms here fix their exploration orders (ascending node index, ascending
(tail, head) edge order) and document their tie-breaks.
"""

from __future__ import annotations

import heapq
import json
import re
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional, Sequence

NodeId = int

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


class DiGraph:
    """A simple directed graph over dense node ids 0..n-1.

    Self-loops and parallel edges are rejected.  Instances are immutable and
    hashable; adjacency is precomputed both as sorted tuples and as bitmasks
    (one Python int per node) because the feasibility checks live and die by
    cheap subset algebra.

    Nodes may carry display names (unique strings); the default names are
    ``n0``..``n{n-1}``.
    """

    __slots__ = ("n", "edges", "names", "_out", "_in", "_out_mask", "_in_mask",
                 "_name_to_id")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]],
                 names: Optional[Sequence[str]] = None):
        if n < 0:
            raise ValueError("node count must be non-negative")
        es = set()
        for (u, v) in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u},{v}) out of range for n={n}")
            if u == v:
                raise ValueError(f"self-loop ({u},{u}) not allowed")
            es.add((u, v))
        self.n = n
        self.edges = frozenset(es)
        if names is None:
            names = tuple(f"n{i}" for i in range(n))
        else:
            names = tuple(names)
            if len(names) != n:
                raise ValueError("names must cover every node")
            if len(set(names)) != n:
                raise ValueError("names must be unique")
        self.names = names
        out: list[list[int]] = [[] for _ in range(n)]
        inn: list[list[int]] = [[] for _ in range(n)]
        om = [0] * n
        im = [0] * n
        for (u, v) in sorted(es):
            out[u].append(v)
            inn[v].append(u)
            om[u] |= 1 << v
            im[v] |= 1 << u
        for lst in inn:
            lst.sort()
        self._out = tuple(tuple(x) for x in out)
        self._in = tuple(tuple(x) for x in inn)
        self._out_mask = tuple(om)
        self._in_mask = tuple(im)
        self._name_to_id = {nm: i for i, nm in enumerate(names)}

    # -- queries ---------------------------------------------------------

    def out_neighbors(self, u: int) -> tuple[int, ...]:
        return self._out[u]

    def in_neighbors(self, u: int) -> tuple[int, ...]:
        return self._in[u]

    def out_mask(self, u: int) -> int:
        return self._out_mask[u]

    def in_mask(self, u: int) -> int:
        return self._in_mask[u]

    def has_edge(self, u: int, v: int) -> bool:
        return (u, v) in self.edges

    def in_degree(self, u: int) -> int:
        return len(self._in[u])

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def node_id(self, name: str) -> int:
        return self._name_to_id[name]

    def node_set(self) -> frozenset[int]:
        return frozenset(range(self.n))

    def check_nodes(self, nodes: Iterable[int]) -> frozenset[int]:
        s = frozenset(nodes)
        for u in s:
            if not (0 <= u < self.n):
                raise ValueError(f"node {u} out of range for n={self.n}")
        return s

    # -- constructors ----------------------------------------------------

    @classmethod
    def complete(cls, n: int, names: Optional[Sequence[str]] = None) -> "DiGraph":
        return cls(n, [(i, j) for i in range(n) for j in range(n) if i != j],
                   names)

    # -- dunder ----------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, DiGraph) and self.n == other.n
                and self.edges == other.edges and self.names == other.names)

    def __hash__(self) -> int:
        return hash((self.n, self.edges, self.names))

    def __repr__(self) -> str:
        return f"DiGraph(n={self.n}, m={len(self.edges)})"

    def __setattr__(self, key, value):
        if hasattr(self, "_name_to_id"):
            raise AttributeError("DiGraph is immutable")
        object.__setattr__(self, key, value)


def mask_of(nodes: Iterable[int]) -> int:
    m = 0
    for u in nodes:
        m |= 1 << u
    return m


def nodes_of(mask: int) -> list[int]:
    out = []
    u = 0
    while mask:
        if mask & 1:
            out.append(u)
        mask >>= 1
        u += 1
    return out


def incoming_neighbors(g: DiGraph, B: Iterable[int]) -> frozenset[int]:
    """Nodes outside B with at least one edge into B."""
    bs = g.check_nodes(B)
    bmask = mask_of(bs)
    res = 0
    for b in bs:
        res |= g.in_mask(b)
    return frozenset(nodes_of(res & ~bmask))


class SCCResult(NamedTuple):
    """SCC decomposition: components in a fixed topological order (every DAG
    edge goes from lower to higher index; ties broken by smallest member),
    the component index of every node, and the edges of the acyclic
    component graph."""

    components: tuple[tuple[int, ...], ...]
    component_of: tuple[int, ...]
    dag_edges: frozenset[tuple[int, int]]


def _scc_filtered(n: int, nodes: Sequence[int], out_adj) -> list[list[int]]:
    """Kosaraju over an implicit subgraph.  ``nodes`` lists the live vertices
    in ascending order; ``out_adj(u)`` yields live out-neighbors ascending.
    Each returned component is sorted."""
    visited = [False] * n
    order: list[int] = []
    for start in nodes:
        if visited[start]:
            continue
        stack: list[tuple[int, Optional[Iterable[int]]]] = [(start, None)]
        while stack:
            u, it = stack.pop()
            if it is None:
                if visited[u]:
                    continue
                visited[u] = True
                it = iter(out_adj(u))
            advanced = False
            for v in it:
                if not visited[v]:
                    stack.append((u, it))
                    stack.append((v, None))
                    advanced = True
                    break
            if not advanced:
                order.append(u)
    radj: list[list[int]] = [[] for _ in range(n)]
    for u in nodes:
        for v in out_adj(u):
            radj[v].append(u)
    comps: list[list[int]] = []
    seen = [False] * n
    for u in reversed(order):
        if seen[u]:
            continue
        comp = []
        stack2 = [u]
        seen[u] = True
        while stack2:
            x = stack2.pop()
            comp.append(x)
            for w in radj[x]:
                if not seen[w]:
                    seen[w] = True
                    stack2.append(w)
        comp.sort()
        comps.append(comp)
    return comps


def scc_decomposition(g: DiGraph) -> SCCResult:
    """Strongly connected components plus the acyclic component graph."""
    comps = _scc_filtered(g.n, range(g.n), g.out_neighbors)
    member = [0] * g.n
    for idx, c in enumerate(comps):
        for u in c:
            member[u] = idx
    edges = {(member[u], member[v]) for (u, v) in g.edges
             if member[u] != member[v]}
    # Canonical topological numbering via Kahn's algorithm, smallest-member
    # tie-break.
    indeg = [0] * len(comps)
    succ: list[list[int]] = [[] for _ in comps]
    for (a, b) in sorted(edges):
        succ[a].append(b)
        indeg[b] += 1
    heap = [(comps[i][0], i) for i in range(len(comps)) if indeg[i] == 0]
    heapq.heapify(heap)
    topo: list[int] = []
    while heap:
        _, i = heapq.heappop(heap)
        topo.append(i)
        for j in succ[i]:
            indeg[j] -= 1
            if indeg[j] == 0:
                heapq.heappush(heap, (comps[j][0], j))
    assert len(topo) == len(comps), "component graph must be acyclic"
    renum = {old: new for new, old in enumerate(topo)}
    ordered = tuple(tuple(comps[old]) for old in topo)
    component_of = [0] * g.n
    for new_idx, comp in enumerate(ordered):
        for u in comp:
            component_of[u] = new_idx
    dag = frozenset((renum[a], renum[b]) for (a, b) in edges)
    return SCCResult(ordered, tuple(component_of), dag)


class ReducedGraph(NamedTuple):
    """A concrete reduced graph plus the original ids of its nodes
    (``orig_nodes[i]`` is the original id of reduced node ``i``)."""

    graph: DiGraph
    orig_nodes: tuple[int, ...]


def reduced_graph(g: DiGraph, F: Iterable[int], F1: Iterable[int]) -> ReducedGraph:
    """The graph on V-F with every edge incident on F removed and every edge
    leaving F1 removed.  F and F1 must be disjoint; F1 lives inside V-F."""
    fs = g.check_nodes(F)
    f1s = g.check_nodes(F1)
    if fs & f1s:
        raise ValueError("F and F1 must be disjoint")
    keep = [u for u in range(g.n) if u not in fs]
    new_id = {u: i for i, u in enumerate(keep)}
    edges = [
        (new_id[u], new_id[v])
        for (u, v) in g.edges
        if u in new_id and v in new_id and u not in f1s
    ]
    names = tuple(g.names[u] for u in keep)
    return ReducedGraph(DiGraph(len(keep), edges, names), tuple(keep))


def source_component(g: DiGraph, F: Iterable[int], F1: Iterable[int]) -> frozenset[int]:
    """The node set of a source component (an SCC with no incoming edge from
    outside itself) of the reduced graph, in original node ids.

    Tie-breaks, in order: components intersecting F1 are never returned
    (callers rely on the result avoiding F1, and such components cannot be
    genuine sources in the configurations that matter); among the remaining
    source components, the one containing the smallest node id wins.
    """
    fs = g.check_nodes(F)
    f1s = g.check_nodes(F1)
    if fs & f1s:
        raise ValueError("F and F1 must be disjoint")
    fmask = mask_of(fs)
    live = [u for u in range(g.n) if u not in fs]

    def adj(u: int):
        if u in f1s:
            return ()
        return nodes_of(g.out_mask(u) & ~fmask)

    comps = _scc_filtered(g.n, live, adj)
    member = {}
    for idx, c in enumerate(comps):
        for u in c:
            member[u] = idx
    has_incoming = [False] * len(comps)
    for u in live:
        for v in adj(u):
            if member[u] != member[v]:
                has_incoming[member[v]] = True
    candidates = [
        frozenset(c)
        for i, c in enumerate(comps)
        if not has_incoming[i] and not (set(c) & f1s)
    ]
    if not candidates:
        raise RuntimeError(
            "no source component avoiding F1 exists; "
            "the graph cannot satisfy the feasibility condition"
        )
    return min(candidates, key=min)


@dataclass(frozen=True)
class PathSet:
    """A family of pairwise vertex-disjoint directed paths into one target.

    Paths share only the target; when the query had a single source they also
    share that source.  ``found`` is the family size; when it falls short of
    the request, ``cut`` carries a vertex cut of that same size separating the
    sources from the target (a Menger certificate).  ``cut`` stays None when
    no such certificate exists, i.e. when a single shared source sits directly
    adjacent to the target.
    """

    sources: frozenset[int]
    target: int
    paths: tuple[tuple[int, ...], ...]
    excluded: frozenset[int] = field(default_factory=frozenset)
    cut: Optional[frozenset[int]] = None
    found: int = 0

    def validate(self, g: DiGraph) -> None:
        """Assert every structural invariant; used liberally by the tests."""
        if self.paths:
            # Verdict-only queries may carry a count without the paths.
            assert len(self.paths) == self.found
        shared_source = (next(iter(self.sources))
                         if len(self.sources) == 1 else None)
        used: set[int] = set()
        for p in self.paths:
            assert len(p) >= 2, "a path has at least an edge"
            assert p[0] in self.sources, f"path start {p[0]} not a source"
            assert p[-1] == self.target
            assert len(set(p)) == len(p), "path revisits a node"
            for (a, b) in zip(p, p[1:]):
                assert g.has_edge(a, b), f"missing edge ({a},{b})"
            body = set(p[:-1])
            assert not (set(p) & self.excluded), "path touches excluded node"
            if shared_source is not None:
                body.discard(shared_source)
            assert not (body & used), "paths are not vertex-disjoint"
            used |= body
        if self.cut is not None:
            assert len(self.cut) == self.found
            assert self.target not in self.cut
            blocked = set(self.cut) | set(self.excluded)
            reach = {s for s in self.sources if s not in blocked}
            frontier = list(reach)
            while frontier:
                u = frontier.pop()
                for v in g.out_neighbors(u):
                    if v not in blocked and v not in reach:
                        reach.add(v)
                        frontier.append(v)
            assert self.target not in reach, "cut does not separate"


_BIG = 1 << 30


class _FlowNet:
    """Tiny unit-capacity flow network with deterministic BFS augmentation.

    Arcs are stored in creation order; BFS scans them in that order, which the
    caller arranges to be ascending (tail, head).  Forward arcs remember their
    initial capacity so flow can be read back for path decomposition.
    """

    __slots__ = ("head", "cap", "init", "rev", "n")

    def __init__(self, n: int):
        self.n = n
        self.head: list[list[int]] = [[] for _ in range(n)]
        self.cap: list[list[int]] = [[] for _ in range(n)]
        self.init: list[list[int]] = [[] for _ in range(n)]
        self.rev: list[list[int]] = [[] for _ in range(n)]

    def add(self, a: int, b: int, c: int) -> None:
        self.head[a].append(b)
        self.cap[a].append(c)
        self.init[a].append(c)
        self.rev[a].append(len(self.head[b]))
        self.head[b].append(a)
        self.cap[b].append(0)
        self.init[b].append(0)
        self.rev[b].append(len(self.head[a]) - 1)

    def augment(self, source: int, sink: int) -> bool:
        parent: list[tuple[int, int]] = [(-1, -1)] * self.n
        parent[source] = (source, -2)
        queue = [source]
        qi = 0
        while qi < len(queue):
            x = queue[qi]
            qi += 1
            hx, cx = self.head[x], self.cap[x]
            for ei in range(len(hx)):
                if cx[ei] <= 0:
                    continue
                y = hx[ei]
                if parent[y][1] == -1:
                    parent[y] = (x, ei)
                    if y == sink:
                        qi = len(queue)  # found; stop scanning
                        break
                    queue.append(y)
        if parent[sink][1] == -1:
            return False
        y = sink
        while y != source:
            x, ei = parent[y]
            self.cap[x][ei] -= 1
            self.cap[y][self.rev[x][ei]] += 1
            y = x
        return True

    def residual_reachable(self, source: int) -> list[bool]:
        seen = [False] * self.n
        seen[source] = True
        queue = [source]
        qi = 0
        while qi < len(queue):
            x = queue[qi]
            qi += 1
            for ei, y in enumerate(self.head[x]):
                if self.cap[x][ei] > 0 and not seen[y]:
                    seen[y] = True
                    queue.append(y)
        return seen

    def flow_on(self, a: int, ei: int) -> int:
        return self.init[a][ei] - self.cap[a][ei]


def max_disjoint_paths(g: DiGraph, sources: Iterable[int], target: int,
                       excluded: Iterable[int] = (), k: int = 1,
                       want_paths: bool = True,
                       share_single_source: bool = True) -> PathSet:
    """Up to ``k`` pairwise vertex-disjoint paths from ``sources`` to
    ``target`` avoiding ``excluded``, via unit-capacity max-flow on the
    node-split graph (every node becomes an in-half and an out-half joined by
    a capacity-1 arc, so a minimum cut consists of split arcs only).

    Paths start at distinct sources and may pass through other sources,
    consuming them.  With exactly one source the default is the classical
    internally-disjoint reading (all paths share that source); pass
    ``share_single_source=False`` to keep strict distinct-source semantics
    instead, in which case a lone source supports at most one path.

    Deterministic by construction: BFS augmentation scans arcs in ascending
    (tail, head) order and path extraction peels flow starting from the
    smallest source, following the smallest flow-carrying head.  When fewer
    than ``k`` paths exist the result carries the matching minimum vertex cut
    separating ``sources`` from ``target``.
    """
    srcs = sorted(g.check_nodes(sources))
    exc = g.check_nodes(excluded)
    if target in exc:
        raise ValueError("target must not be excluded")
    if target in srcs:
        raise ValueError("target must not be a source")
    if set(srcs) & exc:
        raise ValueError("sources and excluded overlap")
    if k < 1:
        raise ValueError("k must be positive")
    if not srcs:
        return PathSet(frozenset(), target, (), frozenset(exc), frozenset())

    single = len(srcs) == 1 and share_single_source
    # A direct source -> target edge in single-source mode is degenerate:
    # both endpoints are shared, so it yields exactly one extra path and no
    # vertex cut can separate the pair.  Handle it outside the flow.
    direct = single and g.has_edge(srcs[0], target)
    n = g.n
    SS = 2 * n              # super-source
    sink = 2 * target       # target's in-half
    net = _FlowNet(2 * n + 1)
    alive = [u not in exc for u in range(n)]

    if single:
        # The lone source is shared by all paths: feed its out-half directly
        # and never consume its split arc.
        net.add(SS, 2 * srcs[0] + 1, _BIG)
    else:
        for s in srcs:
            net.add(SS, 2 * s, _BIG)
    for u in range(n):
        if alive[u] and u != target and not (single and u == srcs[0]):
            net.add(2 * u, 2 * u + 1, 1)
    for (u, v) in sorted(g.edges):
        if not (alive[u] and alive[v]):
            continue
        if u == target or (single and v == srcs[0]):
            continue
        if direct and (u, v) == (srcs[0], target):
            continue
        net.add(2 * u + 1, 2 * v, _BIG)

    flow = 0
    budget = k - (1 if direct else 0)
    while flow < budget and net.augment(SS, sink):
        flow += 1
    total = flow + (1 if direct else 0)

    cut: Optional[frozenset[int]] = None
    if total < k:
        if direct:
            # No vertex set separates an adjacent pair; there is no Menger
            # certificate to give.
            cut = None
        else:
            seen = net.residual_reachable(SS)
            cut = frozenset(
                u for u in range(n)
                if alive[u] and u != target and not (single and u == srcs[0])
                and seen[2 * u] and not seen[2 * u + 1]
            )
            assert len(cut) == flow, "max-flow/min-cut mismatch"

    paths: list[tuple[int, ...]] = []
    if want_paths and direct:
        paths.append((srcs[0], target))
    if want_paths and flow:
        used: list[list[int]] = [
            [net.flow_on(a, ei) for ei in range(len(net.head[a]))]
            for a in range(net.n)
        ]

        def walk_from(u: int) -> tuple[int, ...]:
            # u is an original node already on the path; repeatedly leave via
            # the smallest flow-carrying graph arc.  Arcs were added in
            # ascending head order, so "first unconsumed" is "smallest head".
            path = [u]
            while path[-1] != target:
                x = 2 * path[-1] + 1  # out-half
                for ei in range(len(net.head[x])):
                    if used[x][ei] > 0:
                        used[x][ei] -= 1
                        nxt = net.head[x][ei] // 2
                        path.append(nxt)
                        break
                else:
                    raise AssertionError("flow decomposition ran dry")
            return tuple(path)

        if single:
            for _ in range(flow):
                paths.append(walk_from(srcs[0]))
        else:
            # A source launches a path iff the super-source arc into it
            # carries flow (its split arc alone is ambiguous: paths may pass
            # through other sources).  SS arcs were added in ascending source
            # order.
            for ei in range(len(net.head[SS])):
                if used[SS][ei] > 0:
                    used[SS][ei] -= 1
                    s = net.head[SS][ei] // 2
                    x = 2 * s  # consume the split arc the launch used
                    for sj in range(len(net.head[x])):
                        if used[x][sj] > 0:
                            used[x][sj] -= 1
                            break
                    paths.append(walk_from(s))
    if want_paths:
        assert len(paths) == total, "decomposition lost a path"

    return PathSet(frozenset(srcs), target, tuple(paths), frozenset(exc), cut,
                   found=total)


# ---------------------------------------------------------------------------
# Serialization: graph JSON and DOT, both bit-exact round-trippable.
# ---------------------------------------------------------------------------


def graph_to_json_obj(g: DiGraph) -> dict:
    """``{"nodes": [names...], "edges": [[tail, head]...]}`` with edges sorted
    by (tail id, head id) so emission is canonical."""
    return {
        "nodes": list(g.names),
        "edges": [[g.names[u], g.names[v]] for (u, v) in sorted(g.edges)],
    }


def graph_from_json_obj(obj: dict) -> DiGraph:
    names = list(obj["nodes"])
    idx = {nm: i for i, nm in enumerate(names)}
    if len(idx) != len(names):
        raise ValueError("duplicate node names")
    edges = []
    for pair in obj["edges"]:
        t, h = pair
        if t not in idx or h not in idx:
            raise ValueError(f"edge endpoint {pair} not among nodes")
        edges.append((idx[t], idx[h]))
    return DiGraph(len(names), edges, names)


def graph_dumps(g: DiGraph) -> str:
    return json.dumps(graph_to_json_obj(g), indent=2, sort_keys=True) + "\n"


def graph_loads(text: str) -> DiGraph:
    return graph_from_json_obj(json.loads(text))


def _dot_quote(name: str) -> str:
    if _NAME_RE.match(name):
        return name
    return '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'


def graph_to_dot(g: DiGraph) -> str:
    """Canonical DOT emission: nodes in id order, edges in (tail, head) order,
    two-space indent.  ``graph_from_dot`` reads exactly this dialect back."""
    lines = ["digraph G {"]
    for nm in g.names:
        lines.append(f"  {_dot_quote(nm)};")
    for (u, v) in sorted(g.edges):
        lines.append(f"  {_dot_quote(g.names[u])} -> {_dot_quote(g.names[v])};")
    lines.append("}")
    return "\n".join(lines) + "\n"


_DOT_EDGE = re.compile(
    r'\s*("(?:[^"\\]|\\.)*"|[A-Za-z_][A-Za-z0-9_]*)\s*->\s*'
    r'("(?:[^"\\]|\\.)*"|[A-Za-z_][A-Za-z0-9_]*)\s*;\s*\Z')
_DOT_NODE = re.compile(
    r'\s*("(?:[^"\\]|\\.)*"|[A-Za-z_][A-Za-z0-9_]*)\s*;\s*\Z')


def _dot_unquote(tok: str) -> str:
    if tok.startswith('"'):
        return tok[1:-1].replace('\\"', '"').replace("\\\\", "\\")
    return tok


def graph_from_dot(text: str) -> DiGraph:
    """Parse the restricted DOT dialect produced by :func:`graph_to_dot`."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].strip().startswith("digraph"):
        raise ValueError("not a digraph DOT file")
    if lines[-1].strip() != "}":
        raise ValueError("unterminated DOT graph")
    names: list[str] = []
    edges: list[tuple[str, str]] = []
    for ln in lines[1:-1]:
        m = _DOT_EDGE.match(ln)
        if m:
            edges.append((_dot_unquote(m.group(1)), _dot_unquote(m.group(2))))
            continue
        m = _DOT_NODE.match(ln)
        if m:
            names.append(_dot_unquote(m.group(1)))
            continue
        raise ValueError(f"unparseable DOT line: {ln!r}")
    idx = {nm: i for i, nm in enumerate(names)}
    return DiGraph(len(names),
                   [(idx[t], idx[h]) for (t, h) in edges],
                   names)
