"""Vectorized lockstep execution of many consensus runs on one graph.

Every run shares the (graph, f) pair and therefore the exact iteration plans,
so K runs advance through the OUTER x INNER sweep together: node state lives
in a [K, n] array, each planned route collapses to a per-run 3-entry transfer
table (stationary strategies make the fold a pure function of the injected
value), and one phase becomes a couple of gathers instead of K message loops.

The undefined value is encoded as -1.  Agreement and validity are monitored
while streaming — storing per-iteration snapshots for hundreds of runs over
hundreds of thousands of iterations would dwarf memory — and a rolling
checksum of the v vector lets tests replay any single run on the scalar
engine and compare every iteration without keeping transcripts around.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..digraph import DiGraph
from ..simulator.adversaries import Adversary, MsgCtx
from ..simulator.transcript import Transcript
from .plan import Planner

_FNV = np.uint64(1099511628211)
_IDENT = np.array([-1, 0, 1], dtype=np.int8)


def transcript_checksum(tr: Transcript) -> int:
    """Rolling hash over the per-iteration v vectors of a scalar transcript.

    Matches the checksum the batch engine computes on the fly, so a batch
    run and its scalar replay can be compared iteration-by-iteration
    without retaining either's full history.
    """
    h = 0
    for rec in tr.iterations():
        h = (h * 1099511628211 + int(rec["v"], 2)) & 0xFFFFFFFFFFFFFFFF
    return h


@dataclass
class BatchRun:
    """One run's identity inside a batch: strategy, inputs, seed."""

    strategy: Adversary
    inputs: list
    seed: int = 0


@dataclass
class BatchResult:
    decisions: list            # per run: {node: bit} over non-faulty nodes
    validity_ok: list          # per run: every iteration preserved validity
    agreement_ok: list         # per run: uniform from the suspect block on
    checksums: list            # per run: rolling hash over iteration states
    iterations: int
    total_rounds: int

    def all_ok(self) -> bool:
        return all(self.validity_ok) and all(self.agreement_ok)


class _RouteTables:
    """Per-(phase, route) transfer tables for the whole batch, built lazily.

    Entry [k, x] is what run k's wire delivers along the route when the
    honest value is (undefined, 0, 1)[x].  Runs whose faulty set misses the
    route's transmitting hops keep the identity row and are filled without
    consulting the strategy.
    """

    def __init__(self, advs):
        self.advs = advs
        k = len(advs)
        self.node_dirty = {}           # node -> bool[K] "faulty in run"
        all_faulty = set()
        for adv in advs:
            all_faulty.update(adv.faulty)
        for u in all_faulty:
            col = np.fromiter((u in adv.faulty for adv in advs), bool, k)
            self.node_dirty[u] = col
        self._cache: dict = {}

    def table(self, tag: str, route: tuple) -> np.ndarray:
        key = (tag, route)
        tbl = self._cache.get(key)
        if tbl is None:
            k = len(self.advs)
            tbl = np.tile(_IDENT, (k, 1))
            dirty = None
            for u in route[:-1]:
                col = self.node_dirty.get(u)
                if col is not None:
                    dirty = col if dirty is None else (dirty | col)
            if dirty is not None:
                for run in np.nonzero(dirty)[0]:
                    adv = self.advs[run]
                    fa = adv.faulty
                    for xi, x in enumerate((None, 0, 1)):
                        val = x
                        for hop in range(len(route) - 1):
                            if route[hop] in fa:
                                val = adv.outgoing(MsgCtx(tag, route, hop, val))
                                if val not in (None, 0, 1):
                                    raise ValueError(
                                        f"strategy {adv.name!r} emitted "
                                        f"{val!r}; only 0, 1 or None may go "
                                        "on the wire")
                        tbl[run, xi] = -1 if val is None else val
            self._cache[key] = tbl
        return tbl


def _stack(tables: _RouteTables, tag: str, routes) -> np.ndarray:
    return np.stack([tables.table(tag, r) for r in routes], axis=1)


def _apply(stacked: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Push values[k, r] through table stack [k, r, 3] -> delivered[k, r]."""
    idx = (values + 1).astype(np.intp)[:, :, None]
    return np.take_along_axis(stacked, idx, axis=2)[:, :, 0]


class _PhaseKit:
    """A plan phase compiled for the batch: index arrays plus table stacks."""

    __slots__ = ("kind", "stack", "src", "group", "out")

    def __init__(self, kind, stack, src, group, out):
        self.kind = kind
        self.stack = stack      # [K, R, 3]
        self.src = src          # [R] column gather indices
        self.group = group      # rows per receiving node
        self.out = out          # [|D|] receiving node columns


def _compile_propagate(tables, ph) -> _PhaseKit:
    routes = [p for d in ph.targets for p in ph.paths[d]]
    src = np.array([r[0] for r in routes], dtype=np.intp)
    group = len(routes) // len(ph.targets)
    out = np.array(ph.targets, dtype=np.intp)
    return _PhaseKit("prop", _stack(tables, ph.tag, routes), src, group, out)


def _compile_equality(tables, ph) -> _PhaseKit:
    members = ph.members
    routes = []
    src = []
    for j in members:
        for i in members:
            if i != j:
                routes.append(ph.routes[(i, j)])
                src.append(i)
    out = np.array(members, dtype=np.intp)
    stack = _stack(tables, ph.tag, routes) if routes else None
    return _PhaseKit("eq", stack, np.array(src, dtype=np.intp),
                     len(members) - 1, out)


def _compile_catchup(tables, ph) -> _PhaseKit:
    suspects = sorted(ph.senders)
    routes = [(s, k) for k in suspects for s in ph.senders[k]]
    src = np.array([r[0] for r in routes], dtype=np.intp)
    group = len(routes) // len(suspects)
    return _PhaseKit("catch", _stack(tables, ph.tag, routes), src, group,
                     np.array(suspects, dtype=np.intp))


def _run_propagate_kit(kit, T):
    delivered = _apply(kit.stack, T[:, kit.src])
    k = delivered.shape[0]
    delivered = delivered.reshape(k, len(kit.out), kit.group)
    first = delivered[:, :, 0]
    ok = (delivered == first[:, :, None]).all(axis=2) & (first != -1)
    T[:, kit.out] = np.where(ok, first, np.int8(-1))


def _run_equality_kit(kit, T):
    own = T[:, kit.out]
    if kit.stack is None:        # singleton seed set: nothing on the wire
        ok = own != -1
    else:
        delivered = _apply(kit.stack, T[:, kit.src])
        heard = delivered.reshape(len(T), len(kit.out), kit.group)
        ok = (heard == own[:, :, None]).all(axis=2) & (own != -1)
    T[:, kit.out] = np.where(ok, own, np.int8(-1))


def _run_catchup_kit(kit, V):
    delivered = _apply(kit.stack, V[:, kit.src])
    k = delivered.shape[0]
    delivered = delivered.reshape(k, len(kit.out), kit.group)
    first = delivered[:, :, 0]
    ok = (delivered == first[:, :, None]).all(axis=2) & (first != -1)
    V[:, kit.out] = np.where(ok, first, V[:, kit.out])


def batch_consensus(g: DiGraph, f: int, runs: list, *, check: bool = True,
                    planner: Optional[Planner] = None) -> BatchResult:
    """Advance every run through the full sweep in lockstep.

    All strategies must be stationary.  Monitoring happens inline: validity
    (every fault-free node's value stays within the fault-free values the
    iteration started from) after each iteration, and agreement (fault-free
    values uniform and frozen once the OUTER block matching the run's real
    faulty set completes).
    """
    K = len(runs)
    if K == 0:
        raise ValueError("batch needs at least one run")
    n = g.n
    advs = []
    for r in runs:
        adv = r.strategy.bind(g, f, seed=r.seed)
        if not adv.stationary:
            raise ValueError(
                f"strategy {adv.name!r} is not stationary; scripted runs "
                "need the message-level engine")
        advs.append(adv)
    V = np.empty((K, n), dtype=np.int8)
    for i, r in enumerate(runs):
        row = list(r.inputs)
        if len(row) != n or any(b not in (0, 1) for b in row):
            raise ValueError(f"run {i}: inputs must be {n} bits")
        V[i] = row
    T = np.empty((K, n), dtype=np.int8)

    own_planner = planner is None
    if own_planner:
        planner = Planner(g, f, check=check)
    outer = planner.outer()

    honest = np.ones((K, n), dtype=bool)
    for i, adv in enumerate(advs):
        for u in adv.faulty:
            honest[i, u] = False
    fstar_block = np.array([outer.index(frozenset(adv.faulty))
                            for adv in advs])

    tables = _RouteTables(advs)
    pow2 = (np.uint64(1) << np.arange(n - 1, -1, -1, dtype=np.uint64))
    checksum = np.zeros(K, dtype=np.uint64)
    validity_bad = np.zeros(K, dtype=bool)
    agreement_bad = np.zeros(K, dtype=bool)
    decided = np.zeros(K, dtype=bool)
    agreed_val = np.zeros(K, dtype=np.int8)

    iterations = 0
    total_rounds = 0
    for o, F in enumerate(outer):
        kits: dict = {}
        for X, Y in planner.splits(F):
            plan = planner.plan(F, X, Y)
            s0 = ((V == 0) & honest).any(axis=1)
            s1 = ((V == 1) & honest).any(axis=1)

            T[:] = -1
            stage = list(plan.stage_set)
            T[:, stage] = V[:, stage]
            catchup_kit = None
            for ph in plan.phases:
                kit = kits.get(id(ph))
                if kit is None:
                    if ph.tag == "equality":
                        kit = _compile_equality(tables, ph)
                    elif ph.tag == "catchup":
                        kit = _compile_catchup(tables, ph)
                    else:
                        kit = _compile_propagate(tables, ph)
                    kits[id(ph)] = (kit, ph)
                else:
                    kit = kit[0]
                if kit.kind == "catch":
                    catchup_kit = kit
                elif kit.kind == "eq":
                    _run_equality_kit(kit, T)
                else:
                    _run_propagate_kit(kit, T)
            adopt = list(plan.adopt_set)
            ta = T[:, adopt]
            V[:, adopt] = np.where(ta != -1, ta, V[:, adopt])
            if catchup_kit is not None:
                _run_catchup_kit(catchup_kit, V)

            e0 = ((V == 0) & honest).any(axis=1)
            e1 = ((V == 1) & honest).any(axis=1)
            validity_bad |= (e0 & ~s0) | (e1 & ~s1)
            uniform = ~(e0 & e1)
            cur = e1.astype(np.int8)
            agreement_bad |= decided & (~uniform | (cur != agreed_val))

            checksum = checksum * _FNV + (V != 0).astype(np.uint64) @ pow2
            iterations += 1
            total_rounds += plan.total_rounds

        # End of this OUTER block: runs whose real faulty set is F must now
        # be (and remain) in agreement.
        fresh = (fstar_block == o) & ~decided
        if fresh.any():
            e0 = ((V == 0) & honest).any(axis=1)
            e1 = ((V == 1) & honest).any(axis=1)
            uniform = ~(e0 & e1)
            agreement_bad |= fresh & ~uniform
            agreed_val[fresh] = e1[fresh].astype(np.int8)
            decided |= fresh
        if own_planner:
            planner.release(F)

    decisions = []
    for i in range(K):
        decisions.append({u: int(V[i, u]) for u in range(n)
                          if u not in advs[i].faulty})
    return BatchResult(
        decisions=decisions,
        validity_ok=[not b for b in validity_bad],
        agreement_ok=[not b for b in agreement_bad],
        checksums=[int(c) for c in checksum],
        iterations=iterations,
        total_rounds=total_rounds,
    )
