"""Iteration planning for the consensus protocol.

The protocol sweeps an OUTER loop over every suspect set F (|F| <= f, by size
then lexicographic) and an INNER loop over every unordered split {X, Y} of
the remaining nodes.  Each iteration follows a plan: which side is A (the
propagating side), which case applies, the seed set S, concrete message
routes for every sub-protocol phase, and a round schedule.  Plans are pure
functions of (graph, f, F, split) — every fault-free node can derive the very
same plan from topology alone, which is what makes the algorithm work without
any coordination about plans themselves.

Wire phases, in schedule order:

* ``feed`` (case 2 only): every target in S - A hears f+1 disjoint paths
  from A.
* ``equality``: every ordered pair of S exchanges t along one fixed route.
* ``spread``: every node of V - F - S hears f+1 disjoint paths from S.
* ``catchup`` (only when F is non-empty): each suspect k hears v directly
  from its f+1 smallest fault-free-designated in-neighbors.

Local steps (loading t := v, adopting v := t) carry no messages and belong to
the iteration semantics in :mod:`byzgraph.protocol.execution`.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterator, NamedTuple, Optional

from ..condition import check_propagation_condition
from ..digraph import (
    DiGraph,
    _scc_filtered,
    mask_of,
    max_disjoint_paths,
    nodes_of,
    source_component,
)
from ..relations import propagates, propagates_mask

__all__ = [
    "Case1Choice",
    "Case2Choice",
    "CatchupPhase",
    "EqualityPhase",
    "IterationPlan",
    "Planner",
    "PropagatePhase",
    "choose_S_case1",
    "choose_S_case2",
    "inner_splits",
    "orient_partition",
    "plan_outer",
    "suspect_sets",
    "verify_plan",
]


# -- enumeration orders ----------------------------------------------------


def suspect_sets(n: int, f: int) -> Iterator[tuple[int, ...]]:
    """All suspect sets in canonical order: by size, then lexicographic."""
    for size in range(f + 1):
        yield from combinations(range(n), size)


def plan_outer(g: DiGraph, f: int, *, check: bool = True) -> list[frozenset[int]]:
    """The OUTER loop sequence for (g, f), as frozensets in canonical order.

    With ``check`` (the default) the feasibility condition is verified first
    and a violation raises ValueError carrying the witness partition.
    """
    if check:
        verdict = check_propagation_condition(g, f)
        if not verdict.satisfied:
            raise ValueError(
                f"graph does not support consensus at f={f}; "
                f"witness: {verdict.witness.to_json_obj(g)}")
    return [frozenset(F) for F in suspect_sets(g.n, f)]


def inner_splits(n: int, F) -> Iterator[tuple[frozenset[int], frozenset[int]]]:
    """Unordered splits {X, Y} of the non-suspect nodes, canonically ordered.

    The remaining nodes are sorted ascending; split m (1 <= m < 2^(k-1))
    puts node ``rest[i+1]`` into Y exactly when bit i of m is set, so X
    always contains the smallest remaining node.
    """
    rest = sorted(set(range(n)) - set(F))
    k = len(rest)
    if k < 2:
        return
    for m in range(1, 1 << (k - 1)):
        Y = frozenset(rest[i + 1] for i in range(k - 1) if (m >> i) & 1)
        X = frozenset(rest) - Y
        yield X, Y


# -- orientation -----------------------------------------------------------


def orient_partition(g: DiGraph, f: int, F, X, Y):
    """Decide which side of a split is the propagating side A.

    Returns (A, B, case): case 1 when exactly one direction propagates (A is
    that side), case 2 when both do (A is the side holding the smallest node
    index).  Raises RuntimeError when neither propagates — that cannot happen
    on a feasible graph and signals a condition violation.
    """
    X = frozenset(X)
    Y = frozenset(Y)
    if not X or not Y:
        raise ValueError("both sides of the split must be non-empty")
    fmask = mask_of(F)
    xmask = mask_of(X)
    ymask = mask_of(Y)
    xy = propagates_mask(g, xmask, ymask, fmask, f)
    yx = propagates_mask(g, ymask, xmask, fmask, f)
    if xy and yx:
        return (X, Y, 2) if min(X) < min(Y) else (Y, X, 2)
    if xy:
        return X, Y, 1
    if yx:
        return Y, X, 1
    raise RuntimeError(
        "neither side of the split propagates; "
        "the graph violates the feasibility condition")


# -- choosing the seed set S -----------------------------------------------


class Case1Choice(NamedTuple):
    """Seed set for a one-directional split, plus construction artifacts.

    ``anchor`` is the first node of A that B cannot reach along f+1 disjoint
    paths; ``cut`` is the minimum vertex cut certifying that; ``boundary`` is
    the set of outside in-neighbors of the anchor's backward-closure, whose
    outgoing edges get dropped when extracting the source component.
    """

    S: frozenset[int]
    anchor: int
    cut: frozenset[int]
    boundary: frozenset[int]


def _backward_closure(g: DiGraph, a: int, blocked_mask: int) -> frozenset[int]:
    """Nodes with a directed path to ``a`` avoiding blocked nodes, plus a."""
    seen = 1 << a
    stack = [a]
    while stack:
        x = stack.pop()
        preds = g.in_mask(x) & ~blocked_mask & ~seen
        while preds:
            p = (preds & -preds).bit_length() - 1
            preds &= preds - 1
            seen |= 1 << p
            stack.append(p)
    return frozenset(nodes_of(seen))


def _source_component_within(g: DiGraph, members, fmask: int) -> frozenset[int]:
    """Source SCC of the subgraph induced on ``members`` inside V-F, with the
    smallest-member tie-break."""
    mem_mask = mask_of(members)

    def adj(u: int):
        return nodes_of(g.out_mask(u) & mem_mask & ~fmask)

    comps = _scc_filtered(g.n, sorted(members), adj)
    member_of = {}
    for idx, c in enumerate(comps):
        for u in c:
            member_of[u] = idx
    has_incoming = [False] * len(comps)
    for u in members:
        for w in adj(u):
            if member_of[u] != member_of[w]:
                has_incoming[member_of[w]] = True
    sources = [frozenset(c) for i, c in enumerate(comps) if not has_incoming[i]]
    return min(sources, key=min)


def choose_S_case1(g: DiGraph, f: int, F, A, B) -> Case1Choice:
    """Deterministic seed set when only A propagates to B.

    Construction: walk A in ascending order for the first node the other
    side cannot reach along f+1 disjoint paths avoiding F; take the minimum
    vertex cut for it; collect the backward-closure L of nodes that still
    reach that anchor when the cut is also avoided; drop the outgoing edges
    of L's outside in-neighbors and take the source component.  The result
    lands inside A, is strongly connected with F removed, and propagates to
    everything else — asserted, since a failure would mean the feasibility
    condition did not actually hold.
    """
    A = frozenset(A)
    B = frozenset(B)
    F = frozenset(F)
    fmask = mask_of(F)
    need = f + 1
    anchor = None
    cut: Optional[frozenset[int]] = None
    for a in sorted(A):
        ps = max_disjoint_paths(g, B, a, F, k=need, want_paths=False,
                                share_single_source=False)
        if ps.found < need:
            anchor = a
            cut = ps.cut
            break
    assert anchor is not None, \
        "every anchor candidate is fully reachable; B propagates after all"
    assert cut is not None and len(cut) <= f

    L = _backward_closure(g, anchor, fmask | mask_of(cut))
    # Outside in-neighbors of the closure; every one of them must sit in the
    # cut (anything else with an edge into L would itself reach the anchor).
    boundary = frozenset(nodes_of(_in_neighbors_mask(g, L) & ~fmask))
    assert len(boundary) <= len(cut) <= f

    S = source_component(g, F, boundary)
    if not S <= L:
        # The graph-wide tie-break picked an unrelated source component;
        # restrict to the closure, where a genuine source component always
        # exists (the closure has no incoming edges once the boundary's
        # outgoing edges are dropped).
        S = _source_component_within(g, L, fmask)
    assert S and S <= L <= A
    assert not (S & boundary)
    return Case1Choice(S, anchor, cut, boundary)


def _in_neighbors_mask(g: DiGraph, members) -> int:
    m = 0
    inside = mask_of(members)
    for u in members:
        m |= g.in_mask(u)
    return m & ~inside


class Case2Choice(NamedTuple):
    """Seed set when both directions propagate.  ``blocked`` is the f
    smallest non-suspect nodes, whose outgoing edges are dropped before
    extracting the source component."""

    S: frozenset[int]
    blocked: frozenset[int]


def choose_S_case2(g: DiGraph, f: int, F, A, B) -> Case2Choice:
    """Deterministic seed set when both sides propagate to each other.

    Independent of the split: drop the outgoing edges of the f smallest
    non-suspect nodes and take the source component.  Every plan property
    (S inside A ∪ B, strongly connected, propagating outward, fed by A) is
    guaranteed on feasible graphs and re-asserted by :func:`verify_plan`.
    """
    F = frozenset(F)
    rest = sorted(set(range(g.n)) - F)
    blocked = frozenset(rest[:f])
    S = source_component(g, F, blocked)
    assert S and not (S & blocked)
    return Case2Choice(S, blocked)


# -- plan structures -------------------------------------------------------


@dataclass(frozen=True)
class PropagatePhase:
    """One multi-path broadcast: each target hears f+1 disjoint paths."""

    tag: str                                  # "feed" or "spread"
    sources: frozenset[int]
    targets: tuple[int, ...]                  # ascending
    paths: dict[int, tuple[tuple[int, ...], ...]]
    rounds: int


@dataclass(frozen=True)
class EqualityPhase:
    """All-pairs exchange within S along single fixed routes."""

    members: tuple[int, ...]                  # ascending
    routes: dict[tuple[int, int], tuple[int, ...]]
    rounds: int
    tag: str = "equality"


@dataclass(frozen=True)
class CatchupPhase:
    """Suspects adopt a value heard identically from f+1 in-neighbors."""

    senders: dict[int, tuple[int, ...]]       # suspect -> f+1 in-neighbors
    rounds: int
    tag: str = "catchup"


@dataclass(frozen=True)
class IterationPlan:
    """Everything one INNER iteration needs, derived from topology alone."""

    F: frozenset[int]
    A: frozenset[int]
    B: frozenset[int]
    case: int
    S: frozenset[int]
    stage_set: frozenset[int]    # t := v here, before any messages
    adopt_set: frozenset[int]    # v := t here (when t is defined) at the end
    phases: tuple
    total_rounds: int


# -- the planner -----------------------------------------------------------


class Planner:
    """Builds and caches iteration plans for one (graph, f) pair.

    Routing work is interned per suspect set so the full OUTER x INNER sweep
    stays affordable: equality routes are shared by every split with the same
    (F, S); the case-2 seed set does not depend on the split at all.  Call
    :meth:`release` after finishing a suspect set to keep memory flat during
    long sweeps.
    """

    def __init__(self, g: DiGraph, f: int, *, check: bool = True):
        if f < 0:
            raise ValueError("f must be non-negative")
        if check:
            verdict = check_propagation_condition(g, f)
            if not verdict.satisfied:
                raise ValueError(
                    f"graph does not support consensus at f={f}; "
                    f"witness: {verdict.witness.to_json_obj(g)}")
        self.g = g
        self.f = f
        self._blocks: dict[tuple[int, ...], dict] = {}

    # .. per-suspect-set scratch ..

    def _block(self, F: tuple[int, ...]) -> dict:
        blk = self._blocks.get(F)
        if blk is None:
            fmask = mask_of(F)
            rest = tuple(u for u in range(self.g.n) if u not in F)
            blk = {
                "fmask": fmask,
                "rest": rest,
                "dist": {},        # target -> distance-to-target list
                "routes": {},      # (i, j) -> route tuple
                "ppaths": {},      # (sources frozenset, target) -> paths
                "case2": None,     # Case2Choice
                "case1": {},       # amask -> Case1Choice
                "equality": {},    # S -> EqualityPhase
                "spread": {},      # S -> PropagatePhase
                "feed": {},        # (A, S) -> PropagatePhase
                "catchup": None,   # CatchupPhase or () when F is empty
                "checked": set(),  # S sets whose outward propagation is OK
                "plans": {},       # min(xmask, ymask) -> IterationPlan
                "hit": {},         # target -> minimal must-intersect masks
            }
            self._blocks[F] = blk
        return blk

    def release(self, F) -> None:
        """Drop all cached routing for one suspect set."""
        self._blocks.pop(tuple(sorted(F)), None)

    # .. fast orientation ..

    def _hitmasks(self, blk, t: int) -> tuple[int, ...]:
        """Masks a source set must intersect to reach t with f+1 disjoint paths.

        By the cut formulation of disjoint-path counting, a source set X has
        f+1 vertex-disjoint distinct-source paths to t avoiding the suspects
        iff for every candidate cut C of at most f nodes, some node outside C
        still reaches t with C removed and lies in X.  We enumerate all such
        C once per (suspect set, target), record the surviving-ancestor mask
        of each, and keep only the inclusion-minimal masks; orientation then
        costs a handful of AND tests per target instead of a max-flow.
        """
        hm = blk["hit"].get(t)
        if hm is None:
            g = self.g
            fmask = blk["fmask"]
            avail = [u for u in blk["rest"] if u != t]
            masks = set()
            for size in range(self.f + 1):
                for C in combinations(avail, size):
                    blocked = fmask
                    for u in C:
                        blocked |= 1 << u
                    seen = 1 << t
                    frontier = seen
                    while frontier:
                        nxt = 0
                        ff = frontier
                        while ff:
                            lb = ff & -ff
                            ff ^= lb
                            nxt |= g.in_mask(lb.bit_length() - 1)
                        frontier = nxt & ~seen & ~blocked
                        seen |= frontier
                    masks.add(seen & ~(1 << t) & ~blocked)
            minimal: list[int] = []
            for m in sorted(masks, key=lambda x: (x.bit_count(), x)):
                if not any(mm & m == mm for mm in minimal):
                    minimal.append(m)
            hm = tuple(minimal)
            blk["hit"][t] = hm
        return hm

    def _side_propagates(self, blk, srcmask: int, targets) -> bool:
        """Whether the source side reaches every target at strength f+1."""
        for t in targets:
            for m in self._hitmasks(blk, t):
                if not srcmask & m:
                    return False
        return True

    # .. routing primitives ..

    def _dist_to(self, blk, target: int) -> list[int]:
        dist = blk["dist"].get(target)
        if dist is None:
            g = self.g
            fmask = blk["fmask"]
            dist = [-1] * g.n
            dist[target] = 0
            frontier = [target]
            while frontier:
                nxt = []
                for x in frontier:
                    preds = g.in_mask(x) & ~fmask
                    while preds:
                        p = (preds & -preds).bit_length() - 1
                        preds &= preds - 1
                        if dist[p] < 0:
                            dist[p] = dist[x] + 1
                            nxt.append(p)
                frontier = nxt
            blk["dist"][target] = dist
        return dist

    def _route(self, blk, i: int, j: int) -> tuple[int, ...]:
        """Single canonical route i -> j inside V-F: shortest, smallest next
        hop on ties."""
        key = (i, j)
        route = blk["routes"].get(key)
        if route is None:
            g = self.g
            fmask = blk["fmask"]
            dist = self._dist_to(blk, j)
            assert dist[i] >= 0, "route requested between disconnected nodes"
            hops = [i]
            x = i
            while x != j:
                step = g.out_mask(x) & ~fmask
                best = None
                while step:
                    y = (step & -step).bit_length() - 1
                    step &= step - 1
                    if dist[y] == dist[x] - 1:
                        best = y
                        break  # ascending scan: first hit is smallest
                x = best
                hops.append(x)
            route = tuple(hops)
            blk["routes"][key] = route
        return route

    def _paths_to(self, blk, sources: frozenset[int],
                  target: int) -> tuple[tuple[int, ...], ...]:
        """f+1 disjoint paths from distinct sources to target, avoiding F.
        Direct in-edges win when plentiful; otherwise the flow solver."""
        key = (sources, target)
        paths = blk["ppaths"].get(key)
        if paths is None:
            g = self.g
            need = self.f + 1
            direct = g.in_mask(target) & mask_of(sources)
            if direct.bit_count() >= need:
                paths = tuple((s, target) for s in nodes_of(direct)[:need])
            else:
                ps = max_disjoint_paths(
                    g, sources, target, nodes_of(blk["fmask"]), k=need,
                    want_paths=True, share_single_source=False)
                assert ps.found == need, \
                    "planned propagation lacks disjoint paths"
                paths = ps.paths
            blk["ppaths"][key] = paths
        return paths

    # .. phase builders ..

    def _equality_phase(self, blk, S: frozenset[int]) -> EqualityPhase:
        phase = blk["equality"].get(S)
        if phase is None:
            members = tuple(sorted(S))
            routes = {}
            rounds = 0
            for i in members:
                for j in members:
                    if i == j:
                        continue
                    r = self._route(blk, i, j)
                    routes[(i, j)] = r
                    rounds = max(rounds, len(r) - 1)
            phase = EqualityPhase(members, routes, rounds)
            blk["equality"][S] = phase
        return phase

    def _propagate_phase(self, blk, tag: str, sources: frozenset[int],
                         targets) -> PropagatePhase:
        cache = blk[tag]
        key = sources if tag == "spread" else (sources, frozenset(targets))
        phase = cache.get(key)
        if phase is None:
            tgt = tuple(sorted(targets))
            paths = {}
            rounds = 0
            for d in tgt:
                p = self._paths_to(blk, sources, d)
                paths[d] = p
                rounds = max(rounds, max(len(q) - 1 for q in p))
            phase = PropagatePhase(tag, sources, tgt, paths, rounds)
            cache[key] = phase
        return phase

    def _catchup_phase(self, blk, F: tuple[int, ...]):
        phase = blk["catchup"]
        if phase is None:
            if not F:
                phase = ()
            else:
                g = self.g
                need = self.f + 1
                senders = {}
                for k in F:
                    inn = nodes_of(g.in_mask(k) & ~blk["fmask"])
                    assert len(inn) >= need, \
                        "suspect lacks f+1 non-suspect in-neighbors"
                    senders[k] = tuple(inn[:need])
                phase = CatchupPhase(senders, 1)
            blk["catchup"] = phase
        return phase

    # .. seed sets ..

    def _seed_case2(self, blk, F) -> frozenset[int]:
        choice = blk["case2"]
        if choice is None:
            choice = choose_S_case2(self.g, self.f, F, (), ())
            blk["case2"] = choice
        return choice.S

    def _seed_case1(self, blk, F, A, B) -> frozenset[int]:
        amask = mask_of(A)
        choice = blk["case1"].get(amask)
        if choice is None:
            choice = choose_S_case1(self.g, self.f, F, A, B)
            blk["case1"][amask] = choice
        return choice.S

    def _check_outward(self, blk, S: frozenset[int]) -> None:
        if S in blk["checked"]:
            return
        g = self.g
        smask = mask_of(S)
        out = ((1 << g.n) - 1) & ~smask & ~blk["fmask"]
        assert propagates_mask(g, smask, out, blk["fmask"], self.f), \
            "seed set does not propagate outward"
        blk["checked"].add(S)

    # .. the public surface ..

    def outer(self) -> list[frozenset[int]]:
        return [frozenset(F) for F in suspect_sets(self.g.n, self.f)]

    def splits(self, F) -> Iterator[tuple[frozenset[int], frozenset[int]]]:
        return inner_splits(self.g.n, F)

    def plan(self, F, X, Y) -> IterationPlan:
        """The full plan for one INNER iteration (cached per split)."""
        Ft = tuple(sorted(F))
        blk = self._block(Ft)
        xmask = mask_of(X)
        ymask = mask_of(Y)
        split_key = min(xmask, ymask)
        cached = blk["plans"].get(split_key)
        if cached is not None:
            return cached
        X = frozenset(X)
        Y = frozenset(Y)
        if not X or not Y:
            raise ValueError("both sides of the split must be non-empty")
        xy = self._side_propagates(blk, xmask, Y)
        yx = self._side_propagates(blk, ymask, X)
        if xy and yx:
            A, B, case = (X, Y, 2) if min(X) < min(Y) else (Y, X, 2)
        elif xy:
            A, B, case = X, Y, 1
        elif yx:
            A, B, case = Y, X, 1
        else:
            raise RuntimeError(
                "neither side of the split propagates; "
                "the graph violates the feasibility condition")
        Fset = frozenset(Ft)
        rest = frozenset(blk["rest"])
        if case == 1:
            S = self._seed_case1(blk, Ft, A, B)
        else:
            S = self._seed_case2(blk, Ft)
        self._check_outward(blk, S)

        phases = []
        if case == 2 and S - A:
            phases.append(self._propagate_phase(blk, "feed", A, S - A))
        phases.append(self._equality_phase(blk, S))
        if rest - S:
            phases.append(self._propagate_phase(blk, "spread", S, rest - S))
        catchup = self._catchup_phase(blk, Ft)
        if catchup:
            phases.append(catchup)

        stage = S if case == 1 else A
        adopt = (rest - S) if case == 1 else (rest - (A & S))
        out = IterationPlan(
            F=Fset, A=A, B=B, case=case, S=S,
            stage_set=stage, adopt_set=adopt,
            phases=tuple(phases),
            total_rounds=sum(p.rounds for p in phases),
        )
        blk["plans"][split_key] = out
        return out


# -- mechanical re-verification --------------------------------------------


def verify_plan(g: DiGraph, f: int, plan: IterationPlan) -> None:
    """Assert every structural plan invariant from first principles.

    Used by tests across whole graph corpora; deliberately re-derives
    everything with the certifying (slow) relations instead of trusting the
    planner's own caches.
    """
    F, A, B, S = plan.F, plan.A, plan.B, plan.S
    rest = frozenset(range(g.n)) - F
    assert A and B and not (A & B) and A | B == rest
    assert len(F) <= f
    assert S and S <= rest

    # Seed-set invariants.
    if plan.case == 1:
        assert S <= A
    assert propagates(g, S, rest - S, F, f, want_paths=False).verdict
    if plan.case == 2:
        assert propagates(g, A, S - A, F, f, want_paths=False).verdict

    # Strong connectivity of S with the suspects removed.
    fmask = mask_of(F)
    smask = mask_of(S)

    def adj(u):
        return nodes_of(g.out_mask(u) & smask & ~fmask)

    comps = _scc_filtered(g.n, sorted(S), adj)
    assert len(comps) == 1, "seed set is not strongly connected"

    # Stage and adopt sets.
    if plan.case == 1:
        assert plan.stage_set == S
        assert plan.adopt_set == rest - S
    else:
        assert plan.stage_set == A
        assert plan.adopt_set == rest - (A & S)

    # Phases: structure, coverage, routing, durations.
    tags = [p.tag for p in plan.phases]
    expected = []
    if plan.case == 2 and S - A:
        expected.append("feed")
    expected.append("equality")
    if rest - S:
        expected.append("spread")
    if F:
        expected.append("catchup")
    assert tags == expected, (tags, expected)

    for phase in plan.phases:
        if phase.tag == "equality":
            assert phase.members == tuple(sorted(S))
            longest = 0
            for i in S:
                for j in S:
                    if i == j:
                        continue
                    r = phase.routes[(i, j)]
                    assert r[0] == i and r[-1] == j
                    assert not (set(r) & F)
                    for (x, y) in zip(r, r[1:]):
                        assert g.has_edge(x, y)
                    longest = max(longest, len(r) - 1)
            assert len(phase.routes) == len(S) * (len(S) - 1)
            assert phase.rounds == longest
        elif phase.tag in ("feed", "spread"):
            P = phase.sources
            D = frozenset(phase.targets)
            if phase.tag == "spread":
                assert P == S and D == rest - S
            else:
                assert P == A and D == S - A
            longest = 0
            for d in phase.targets:
                paths = phase.paths[d]
                assert len(paths) == f + 1
                starts = [p[0] for p in paths]
                assert len(set(starts)) == f + 1
                seen: set[int] = set()
                for p in paths:
                    assert p[0] in P and p[-1] == d
                    assert not (set(p) & F)
                    for (x, y) in zip(p, p[1:]):
                        assert g.has_edge(x, y)
                    body = set(p[:-1])
                    assert not (body & seen), "paths share a node"
                    seen |= body
                    longest = max(longest, len(p) - 1)
            assert phase.rounds == longest
        elif phase.tag == "catchup":
            assert set(phase.senders) == set(F)
            for k, inn in phase.senders.items():
                assert len(inn) == f + 1
                for s in inn:
                    assert s not in F and g.has_edge(s, k)
            assert phase.rounds == 1
        else:  # pragma: no cover - defensive
            raise AssertionError(f"unknown phase {phase.tag}")

    assert plan.total_rounds == sum(p.rounds for p in plan.phases)
