"""Executing iteration plans: the consensus semantics shared by all engines.

The functions here are the reference implementation of one INNER iteration
and of the whole multi-iteration run.  They operate on plain per-node state
(``v`` carried across iterations, scratch ``t`` inside one) and fold each
planned route through the adversary hop by hop, which is observationally
identical to the message-level engine but skips its queues.  Equivalence
between the two is asserted by tests, not assumed.

Bookkeeping convention: nominal state is maintained for *every* node by the
honest rules, including nodes the adversary actually controls.  A faulty
node influences the run only through what it transmits; monitors simply
ignore the faulty nodes' bookkeeping when judging agreement and validity.
"""

from __future__ import annotations

from typing import Optional

from ..condition import check_propagation_condition
from ..digraph import DiGraph, graph_to_json_obj, source_component
from ..simulator.adversaries import Adversary, MsgCtx, Value
from ..simulator.transcript import Transcript
from .plan import IterationPlan, Planner


class NodeState:
    """Per-node protocol state: persistent ``v``, per-iteration scratch ``t``."""

    __slots__ = ("v", "t")

    def __init__(self, v: int, t: Value = None):
        self.v = v
        self.t = t

    def __repr__(self):
        return f"NodeState(v={self.v}, t={self.t})"


def state_bits(states) -> str:
    """The ``v`` vector as a bitstring over all nodes, lowest id first."""
    return "".join("01"[s.v] for s in states)


_CLEAN = {None: None, 0: 0, 1: 1}  # identity table for fault-free routes


class FoldWire:
    """Delivers one value along a planned route, letting faulty hops rewrite.

    Honest relays forward unchanged, so the delivered value is the fold of
    the adversary's ``outgoing`` over the faulty transmitting hops only.  A
    node that would stay silent is modelled as transmitting ``None``.

    Because only stationary strategies run here, the fold over a fixed route
    is a pure function of the injected value; each route is folded once per
    possible input and the result cached as a 3-entry table.
    """

    __slots__ = ("adv", "faulty", "_tables")

    def __init__(self, adv: Adversary):
        self.adv = adv
        self.faulty = adv.faulty
        self._tables: dict = {}

    def _fold(self, phase: str, route: tuple[int, ...], value: Value) -> Value:
        val = value
        for hop in range(len(route) - 1):
            if route[hop] in self.faulty:
                val = self.adv.outgoing(MsgCtx(phase, route, hop, val))
                if val not in (None, 0, 1):
                    raise ValueError(
                        f"strategy {self.adv.name!r} emitted {val!r}; "
                        "only 0, 1 or None may go on the wire")
        return val

    def deliver(self, phase: str, route: tuple[int, ...], value: Value) -> Value:
        if not self.faulty:
            return value
        key = (phase, route)
        tab = self._tables.get(key)
        if tab is None:
            if any(u in self.faulty for u in route[:-1]):
                tab = {x: self._fold(phase, route, x) for x in (None, 0, 1)}
            else:
                tab = _CLEAN
            self._tables[key] = tab
        return tab[value]


def combine_propagate(got: list) -> Value:
    """f+1 path deliveries fold to a bit only when unanimous and defined."""
    first = got[0]
    if first is None:
        return None
    for x in got:
        if x != first:
            return None
    return first


def run_propagate(ph, states, wire: FoldWire) -> None:
    """Multi-path broadcast: each target hears its f+1 disjoint paths.

    The value put on a path is the *source's* current scratch t; the target
    keeps the common bit or falls to undefined.  Only targets change.
    """
    updates = {}
    for tgt in ph.targets:
        got = [wire.deliver(ph.tag, route, states[route[0]].t)
               for route in ph.paths[tgt]]
        updates[tgt] = combine_propagate(got)
    for tgt, val in updates.items():
        states[tgt].t = val


def run_equality(ph, states, wire: FoldWire) -> None:
    """All-pairs exchange inside S: survivors are exactly the members whose
    own defined bit matched every bit they heard.

    All deliveries are computed against the pre-round t values before any
    member is updated (synchronous round semantics).
    """
    old = {j: states[j].t for j in ph.members}
    alive = {j: old[j] is not None for j in ph.members}
    for (i, j), route in ph.routes.items():
        if alive[j] and wire.deliver(ph.tag, route, old[i]) != old[j]:
            alive[j] = False
    for j in ph.members:
        if not alive[j]:
            states[j].t = None


def run_catchup(ph, states, wire: FoldWire) -> None:
    """Suspects adopt a bit heard identically from their f+1 chosen senders.

    Senders transmit their (already updated) persistent v over the direct
    edge; a suspect keeps its old v unless the f+1 deliveries are one
    common defined bit.
    """
    updates = {}
    for k, senders in ph.senders.items():
        got = [wire.deliver(ph.tag, (s, k), states[s].v) for s in senders]
        val = combine_propagate(got)
        if val is not None:
            updates[k] = val
    for k, val in updates.items():
        states[k].v = val


def run_inner_iteration(plan: IterationPlan, states, wire: FoldWire) -> None:
    """One INNER iteration: stage, exchange, adopt, then suspect catch-up.

    Scratch t is reset everywhere first — every read of t later in the
    iteration is preceded by a write, so no stale value can leak across
    iterations; only v persists.
    """
    for st in states:
        st.t = None
    for u in plan.stage_set:
        states[u].t = states[u].v

    catchup = None
    for ph in plan.phases:
        if ph.tag == "catchup":
            catchup = ph
        elif ph.tag == "equality":
            run_equality(ph, states, wire)
        else:
            run_propagate(ph, states, wire)

    for u in plan.adopt_set:
        t = states[u].t
        if t is not None:
            states[u].v = t

    if catchup is not None:
        run_catchup(catchup, states, wire)


def _validated_inputs(g: DiGraph, inputs) -> list[int]:
    vals = list(inputs)
    if len(vals) != g.n:
        raise ValueError(f"expected {g.n} inputs, got {len(vals)}")
    for u, b in enumerate(vals):
        if b not in (0, 1):
            raise ValueError(f"input for node {u} must be 0 or 1, got {b!r}")
    return vals


def bc_consensus(g: DiGraph, f: int, inputs, adversary: Optional[Adversary] = None,
                 *, seed: int = 0, check: bool = True,
                 planner: Optional[Planner] = None):
    """Run the full consensus sweep; return (decisions, transcript).

    ``decisions`` maps every node the adversary does *not* control to its
    final v.  The transcript records the v vector after every iteration and
    is byte-reproducible for identical arguments.  A shared ``planner`` lets
    many runs on one (g, f) reuse all routing work; when the planner is
    created here it is also pruned here, keeping memory flat on long sweeps.

    Only stationary strategies run on this engine; scripted ones need the
    message-level engine in ``byzgraph.simulator.engine``.
    """
    vals = _validated_inputs(g, inputs)
    adv = adversary if adversary is not None else Adversary()
    adv.bind(g, f, seed=seed)
    if not adv.stationary:
        raise ValueError(
            f"strategy {adv.name!r} is not stationary; "
            "run it on the message-level engine (byzgraph.simulator.engine)")

    own_planner = planner is None
    if own_planner:
        planner = Planner(g, f, check=check)

    states = [NodeState(b) for b in vals]
    wire = FoldWire(adv)
    tr = Transcript()
    tr.add_start(state_bits(states))

    clock = 0
    for o, F in enumerate(planner.outer()):
        for i, (X, Y) in enumerate(planner.splits(F)):
            plan = planner.plan(F, X, Y)
            run_inner_iteration(plan, states, wire)
            clock += plan.total_rounds
            tr.add_iteration(o, i, clock, state_bits(states))
        if own_planner:
            planner.release(F)

    tr.set_header(
        graph_obj=graph_to_json_obj(g), f=f, inputs=vals,
        faulty=[g.names[u] for u in sorted(adv.faulty)],
        strategy=adv.name, seed=seed, engine="fast", planned_rounds=clock)
    decisions = {u: states[u].v for u in range(g.n) if u not in adv.faulty}
    tr.set_result({g.names[u]: v for u, v in decisions.items()}, clock)
    return decisions, tr


def f0_consensus(g: DiGraph, inputs, *, check: bool = True) -> dict[int, int]:
    """Fault-free consensus: everyone decides the source leader's input.

    With no faults the unique source component reaches every node, so its
    minimum-index member can simply route its input out; the fixed point of
    that routing is returned directly.
    """
    vals = _validated_inputs(g, inputs)
    if check:
        verdict = check_propagation_condition(g, 0)
        if not verdict.satisfied:
            raise ValueError(
                "graph does not support fault-free consensus; "
                f"witness: {verdict.witness.to_json_obj(g)}")
    leader = min(source_component(g, (), ()))
    return {u: vals[leader] for u in range(g.n)}


def multivalued_consensus(g: DiGraph, f: int, inputs, adversary: Optional[Adversary] = None,
                          *, bits: int = 8, seed: int = 0, check: bool = True,
                          planner: Optional[Planner] = None) -> dict[int, int]:
    """Agree on a word by running one binary instance per bit position.

    All instances share one planner (and the same seed), so the added cost
    over a single binary run is execution only.  The decided word's bit b is
    the decision of instance b; agreement on every bit gives agreement on
    the word, while the word itself may equal no input when inputs differ.
    """
    if bits < 1:
        raise ValueError("need at least one bit position")
    words = list(inputs)
    if len(words) != g.n:
        raise ValueError(f"expected {g.n} inputs, got {len(words)}")
    for u, w in enumerate(words):
        if not (0 <= w < (1 << bits)):
            raise ValueError(
                f"input for node {u} must fit in {bits} bits, got {w!r}")

    if planner is None:
        planner = Planner(g, f, check=check)
    out: dict[int, int] = {}
    for b in range(bits):
        layer = [(w >> b) & 1 for w in words]
        decisions, _ = bc_consensus(
            g, f, layer, adversary, seed=seed, check=False, planner=planner)
        for u, bit in decisions.items():
            out[u] = out.get(u, 0) | (bit << b)
    return out
