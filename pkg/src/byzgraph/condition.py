"""Feasibility deciders for synchronous consensus under a fault bound.

A directed graph supports the protocol for bound ``f`` exactly when, for
every way of writing the nodes as A + B + F with A and B non-empty and
|F| <= f, at least one of A, B propagates to the other (see
:mod:`byzgraph.relations`).  :func:`check_propagation_condition` decides that
by scanning partitions in a fixed canonical order and returns a witness
partition on violation.

:func:`check_arrow_condition` decides an equivalent formulation phrased over
four-way partitions L + C + R + F and the cheap neighbor-count relation; the
two checkers must agree on every graph, which :func:`equivalence_fuzz`
hammers on.  :func:`check_degree_bounds` is the necessary-but-not-sufficient
screen (population size and minimum in-degree) that the main checker runs
first so that undersized graphs fail fast with a concrete witness.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterator, NamedTuple, Optional

from .digraph import DiGraph, mask_of, nodes_of
from .generators import gen_random
from .relations import arrow, propagates, propagates_mask

__all__ = [
    "ArrowWitness",
    "ConditionVerdict",
    "DegreeCheck",
    "FuzzReport",
    "PropagationWitness",
    "check_arrow_condition",
    "check_degree_bounds",
    "check_propagation_condition",
    "equivalence_fuzz",
    "iter_fuzz_graphs",
]


def _names(g: DiGraph, nodes) -> list[str]:
    return [g.names[u] for u in sorted(nodes)]


@dataclass(frozen=True)
class PropagationWitness:
    """A partition (A, B, F) on which neither side propagates to the other."""

    A: frozenset[int]
    B: frozenset[int]
    F: frozenset[int]

    def validate(self, g: DiGraph, f: int) -> None:
        assert self.A and self.B
        assert len(self.F) <= f
        assert self.A | self.B | self.F == frozenset(range(g.n))
        assert not (self.A & self.B) and not (self.A & self.F)
        assert not (self.B & self.F)
        assert not propagates(g, self.A, self.B, self.F, f,
                              want_paths=False).verdict
        assert not propagates(g, self.B, self.A, self.F, f,
                              want_paths=False).verdict

    def to_json_obj(self, g: DiGraph) -> dict:
        return {"A": _names(g, self.A), "B": _names(g, self.B),
                "F": _names(g, self.F)}


@dataclass(frozen=True)
class ArrowWitness:
    """A partition (L, C, R, F) on which neither side absorbs the other."""

    L: frozenset[int]
    C: frozenset[int]
    R: frozenset[int]
    F: frozenset[int]

    def validate(self, g: DiGraph, f: int) -> None:
        assert self.L and self.R
        assert len(self.F) <= f
        parts = (self.L, self.C, self.R, self.F)
        assert frozenset().union(*parts) == frozenset(range(g.n))
        total = sum(len(p) for p in parts)
        assert total == g.n  # pairwise disjoint
        assert not arrow(g, self.L | self.C, self.R, f)
        assert not arrow(g, self.R | self.C, self.L, f)

    def to_json_obj(self, g: DiGraph) -> dict:
        return {"L": _names(g, self.L), "C": _names(g, self.C),
                "R": _names(g, self.R), "F": _names(g, self.F)}


@dataclass(frozen=True)
class ConditionVerdict:
    """Outcome of a feasibility check.

    ``witness`` is populated exactly when ``satisfied`` is False and always
    re-verifies against the raw relations.  ``partitions_examined`` counts
    evaluated partitions in canonical order up to the verdict (0 when the
    degree screen already produced a witness); it does not depend on how many
    workers scanned.  ``screened`` names the screen that fired, if any.
    """

    satisfied: bool
    f: int
    method: str
    witness: Optional[object] = None
    partitions_examined: int = 0
    screened: Optional[str] = None

    def __bool__(self) -> bool:
        return self.satisfied

    def to_json_obj(self, g: DiGraph) -> dict:
        return {
            "satisfied": self.satisfied,
            "f": self.f,
            "method": self.method,
            "witness": (None if self.witness is None
                        else self.witness.to_json_obj(g)),
            "partitions_examined": self.partitions_examined,
            "screened": self.screened,
        }


class DegreeCheck(NamedTuple):
    """Necessary-condition screen result: population and in-degree bounds."""

    ok: bool
    node: Optional[int]
    detail: str


def check_degree_bounds(g: DiGraph, f: int) -> DegreeCheck:
    """Necessary conditions: n >= 3f+1, and for f > 0 every node needs at
    least 2f+1 incoming neighbors.  ``node`` carries the first offender in id
    order for the degree clause (None for the size clause)."""
    if f < 0:
        raise ValueError("f must be non-negative")
    if g.n < 3 * f + 1:
        return DegreeCheck(False, None, f"n={g.n} is below 3f+1={3 * f + 1}")
    if f > 0:
        need = 2 * f + 1
        for u in range(g.n):
            indeg = g.in_mask(u).bit_count()
            if indeg < need:
                return DegreeCheck(
                    False, u,
                    f"node {g.names[u]} has {indeg} incoming neighbors, "
                    f"needs {need}")
    return DegreeCheck(True, None, "ok")


# -- propagation-form checker ----------------------------------------------


def _screen_witness(g: DiGraph, f: int,
                    screen: DegreeCheck) -> PropagationWitness:
    """Turn a failed screen into a concrete violating partition."""
    nodes = list(range(g.n))
    if screen.node is None:
        # Too few nodes overall: both sides can be kept at size <= f, leaving
        # at most f nodes for F, and a source set of size <= f never
        # propagates to a non-empty target.
        a = min(f, g.n - 1)
        b = min(f, g.n - a)
        A = frozenset(nodes[:a])
        B = frozenset(nodes[a:a + b])
        F = frozenset(nodes[a + b:])
    else:
        # Node u is short on incoming neighbors: suspect f of them and u has
        # at most f left, so nobody can push f+1 disjoint paths into it; the
        # singleton {u} cannot push anywhere either.
        u = screen.node
        inn = nodes_of(g.in_mask(u))
        F = frozenset(inn[:f])
        A = frozenset({u})
        B = frozenset(v for v in nodes if v != u and v not in F)
    w = PropagationWitness(A, B, F)
    w.validate(g, f)
    return w


def _partition_blocks(n: int, f: int) -> Iterator[tuple[int, ...]]:
    """Suspect sets F in canonical order: by size, then lexicographic."""
    for size in range(f + 1):
        yield from combinations(range(n), size)


def _scan_one_block(g: DiGraph, f: int, F: tuple[int, ...]):
    """Scan every unordered {A, B} split of V-F; returns (count, witness)."""
    fmask = mask_of(F)
    rest = [u for u in range(g.n) if u not in F]
    k = len(rest)
    if k < 2:
        return 0, None
    count = 0
    restmask = mask_of(rest)
    bit = [1 << u for u in rest]
    for m in range(1, 1 << (k - 1)):
        bmask = 0
        mm = m
        i = 1
        while mm:
            if mm & 1:
                bmask |= bit[i]
            mm >>= 1
            i += 1
        amask = restmask & ~bmask
        count += 1
        # Try the larger side as the source first; it short-circuits more.
        if amask.bit_count() >= bmask.bit_count():
            first, second = (amask, bmask), (bmask, amask)
        else:
            first, second = (bmask, amask), (amask, bmask)
        if propagates_mask(g, first[0], first[1], fmask, f):
            continue
        if propagates_mask(g, second[0], second[1], fmask, f):
            continue
        return count, PropagationWitness(
            frozenset(nodes_of(amask)), frozenset(nodes_of(bmask)),
            frozenset(F))
    return count, None


_WORKER_STATE: dict = {}


def _pool_init(n, edges, names, f):
    _WORKER_STATE["g"] = DiGraph(n, edges, names)
    _WORKER_STATE["f"] = f


def _pool_scan(F):
    return _scan_one_block(_WORKER_STATE["g"], _WORKER_STATE["f"], F)


def check_propagation_condition(g: DiGraph, f: int, *, screen: bool = True,
                                jobs: int = 1) -> ConditionVerdict:
    """Decide feasibility by scanning partitions A + B + F directly.

    Deterministic regardless of ``jobs``: suspect sets go by size then
    lexicographic order, splits of the remainder by ascending bitmask (the
    smallest remaining node is always in A), and the reported witness is the
    first violating partition in that order.
    """
    if g.n < 2:
        raise ValueError("need at least two nodes")
    if f < 0:
        raise ValueError("f must be non-negative")

    if screen:
        deg = check_degree_bounds(g, f)
        if not deg.ok:
            kind = "size-bound" if deg.node is None else "in-degree"
            return ConditionVerdict(
                False, f, "propagation",
                witness=_screen_witness(g, f, deg), screened=kind)

    blocks = _partition_blocks(g.n, f)
    examined = 0
    if jobs <= 1:
        for F in blocks:
            count, w = _scan_one_block(g, f, F)
            examined += count
            if w is not None:
                return ConditionVerdict(False, f, "propagation", witness=w,
                                        partitions_examined=examined)
    else:
        with ProcessPoolExecutor(
                max_workers=jobs, initializer=_pool_init,
                initargs=(g.n, tuple(sorted(g.edges)), g.names, f)) as pool:
            for count, w in pool.map(_pool_scan, blocks, chunksize=4):
                examined += count
                if w is not None:
                    return ConditionVerdict(
                        False, f, "propagation", witness=w,
                        partitions_examined=examined)
    return ConditionVerdict(True, f, "propagation",
                            partitions_examined=examined)


# -- arrow-form checker ----------------------------------------------------
#
# Direct reading: every four-way partition L + C + R + F (L, R non-empty,
# |F| <= f) must have arrow(L|C, R) or arrow(R|C, L).  Scanning 4-way splits
# is wasteful; the form below is equivalent and quadratic-free.  Write
# g_F(X) = number of nodes outside X (and outside F) with an edge into X.
# Then a violating partition exists iff some F admits two disjoint non-empty
# X, Y in V-F with g_F(X) <= f and g_F(Y) <= f: given a violation take
# X = L, Y = R (the absorbed sides have few feeders by definition); given
# such a pair take L = X, R = Y, C = the rest, and both arrows fail because
# every potential feeder of R sits outside R, likewise for L.


def _arrow_block(g: DiGraph, f: int, F: tuple[int, ...]):
    """Find two disjoint low-feeder sets within V-F, if any exist."""
    fmask = mask_of(F)
    rest = [u for u in range(g.n) if u not in F]
    k = len(rest)
    if k < 2:
        return 0, None
    # in_union[s] = union of in-neighbor masks over the members of compact
    # subset s (bits index into `rest`); built by peeling the lowest bit.
    size = 1 << k
    in_rest = [g.in_mask(u) for u in rest]
    expand = [1 << u for u in rest]
    in_union = [0] * size
    low = bytearray(size)
    global_mask = [0] * size  # compact subset -> mask over original ids
    full_rest = mask_of(rest)
    examined = 0
    for s in range(1, size):
        lb = (s & -s).bit_length() - 1
        prev = s & (s - 1)
        in_union[s] = in_union[prev] | in_rest[lb]
        global_mask[s] = global_mask[prev] | expand[lb]
        examined += 1
        feeders = in_union[s] & full_rest & ~global_mask[s]
        if feeders.bit_count() <= f:
            low[s] = 1
    # sub_low[m] = 1 iff some low set is a subset of compact mask m.
    sub_low = bytearray(low)
    for j in range(k):
        step = 1 << j
        for m in range(size):
            if m & step and sub_low[m ^ step]:
                sub_low[m] = 1
    fullc = size - 1
    for s in range(1, size):
        if low[s] and sub_low[fullc & ~s]:
            comp = fullc & ~s
            for t in range(1, size):
                if t & comp == t and low[t]:
                    X = frozenset(nodes_of(global_mask[s]))
                    Y = frozenset(nodes_of(global_mask[t]))
                    C = frozenset(rest) - X - Y
                    return examined, ArrowWitness(X, C, Y, frozenset(F))
            raise AssertionError("subset table promised a partner")
    return examined, None


def check_arrow_condition(g: DiGraph, f: int) -> ConditionVerdict:
    """Decide feasibility via the neighbor-count formulation.

    Equivalent to :func:`check_propagation_condition` on every graph (the
    fuzzer enforces this); cheaper per partition since no flow is involved.
    The witness is the first pair of low-feeder sets in canonical order
    (suspect sets by size then lex, sets by ascending compact bitmask), with
    C absorbing the remainder.
    """
    if g.n < 2:
        raise ValueError("need at least two nodes")
    if f < 0:
        raise ValueError("f must be non-negative")
    examined = 0
    for F in _partition_blocks(g.n, f):
        count, w = _arrow_block(g, f, F)
        examined += count
        if w is not None:
            w.validate(g, f)
            return ConditionVerdict(False, f, "arrow", witness=w,
                                    partitions_examined=examined)
    return ConditionVerdict(True, f, "arrow", partitions_examined=examined)


# -- cross-checking the two forms ------------------------------------------


@dataclass(frozen=True)
class FuzzReport:
    """Agreement report between the two condition checkers."""

    n: int
    f: int
    mode: str
    checked: int
    agreed: bool
    disagreement: Optional[dict] = field(default=None)

    def to_json_obj(self) -> dict:
        return {"n": self.n, "f": self.f, "mode": self.mode,
                "checked": self.checked, "agreed": self.agreed,
                "disagreement": self.disagreement}


def _all_graphs(n: int) -> Iterator[DiGraph]:
    pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
    for code in range(1 << len(pairs)):
        edges = [pairs[i] for i in range(len(pairs)) if (code >> i) & 1]
        yield DiGraph(n, edges)


def iter_fuzz_graphs(n: int, mode: str = "random", trials: int = 100,
                     seed: int = 1) -> Iterator[DiGraph]:
    """The deterministic graph stream behind the equivalence campaign.

    ``exhaustive`` mode walks all 2^(n(n-1)) digraphs and needs n <= 4;
    ``random`` mode draws ``trials`` graphs with varying edge density from
    the deterministic generator, so a stream is reproducible from its seed.
    Arguments are validated before the first graph is produced.
    """
    if mode not in ("exhaustive", "random"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "exhaustive" and n > 4:
        raise ValueError("exhaustive mode is limited to n <= 4")
    if n < 2:
        raise ValueError("need at least two nodes")

    if mode == "exhaustive":
        return _all_graphs(n)

    def _random_stream():
        for i in range(trials):
            # Spread densities across the sweep, deterministically.
            p = 0.05 + 0.9 * ((i * 0x9E37) % 1000) / 1000.0
            yield gen_random(n, p, seed * 1_000_003 + i)
    return _random_stream()


def equivalence_fuzz(n: int, f: int, mode: str = "random",
                     trials: int = 100, seed: int = 1) -> FuzzReport:
    """Run both checkers over many graphs and report the first disagreement."""
    graphs = iter_fuzz_graphs(n, mode, trials, seed)
    checked = 0
    for g in graphs:
        a = check_propagation_condition(g, f, screen=False)
        b = check_arrow_condition(g, f)
        checked += 1
        if a.satisfied != b.satisfied:
            return FuzzReport(
                n, f, mode, checked, False,
                {"edges": sorted(g.edges),
                 "propagation": a.satisfied, "arrow": b.satisfied})
    return FuzzReport(n, f, mode, checked, True)
