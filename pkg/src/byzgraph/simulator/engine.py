"""Message-level synchronous round engine.

Every planned route becomes real messages travelling one hop per round
through per-link FIFO buffers with sequence numbers, delivered exactly once.
Faulty nodes' outbound messages are rewritten by the adversary — at send
time for stationary strategies, or arbitrarily via the per-round script hook
for scripted ones, which get read access to the whole world and write access
to pending messages leaving their nodes.

This engine exists to ground the faster executors: its observable behavior
(per-iteration state, decisions, clock) must match the scalar fold engine
exactly for stationary strategies, which the test suite asserts.  Silence is
carried as an explicit undefined value, so "nothing arrived by the deadline"
and "an undefined value arrived" coincide, as the receive semantics demand.
"""

from __future__ import annotations

from collections import deque
from typing import Optional

from ..digraph import DiGraph, graph_to_json_obj
from ..protocol.execution import NodeState, combine_propagate, state_bits
from ..protocol.plan import Planner
from .adversaries import Adversary, MsgCtx, Value
from .transcript import Transcript


class Msg:
    """One in-flight message.  ``hop`` indexes the sender within the route;
    scripted adversaries may rewrite ``value`` while the message is queued."""

    __slots__ = ("seq", "phase", "route", "hop", "value")

    def __init__(self, seq: int, phase: str, route: tuple[int, ...],
                 hop: int, value: Value):
        self.seq = seq
        self.phase = phase
        self.route = route
        self.hop = hop
        self.value = value

    @property
    def sender(self) -> int:
        return self.route[self.hop]

    @property
    def receiver(self) -> int:
        return self.route[self.hop + 1]

    def __repr__(self):
        return (f"Msg(seq={self.seq}, {self.phase}, {self.route}, "
                f"hop={self.hop}, value={self.value})")


class World:
    """Full simulation state: nodes, links, clock, transcript, adversary."""

    def __init__(self, g: DiGraph, f: int, inputs, adversary: Optional[Adversary] = None,
                 *, seed: int = 0, check: bool = True,
                 planner: Optional[Planner] = None,
                 record_messages: bool = False):
        vals = list(inputs)
        if len(vals) != g.n:
            raise ValueError(f"expected {g.n} inputs, got {len(vals)}")
        if any(b not in (0, 1) for b in vals):
            raise ValueError("inputs must be bits")
        self.g = g
        self.f = f
        self.adv = (adversary if adversary is not None else Adversary())
        self.adv.bind(g, f, seed=seed)
        self.faulty = self.adv.faulty
        self.seed = seed
        self.own_planner = planner is None
        self.planner = planner if planner is not None else Planner(g, f, check=check)
        self.inputs = vals
        self.states = [NodeState(b) for b in vals]
        self.links: dict[tuple[int, int], deque] = \
            {e: deque() for e in sorted(g.edges)}
        self.next_seq: dict[tuple[int, int], int] = dict.fromkeys(self.links, 0)
        self._active: set[tuple[int, int]] = set()
        self.clock = 0
        self.outer_index = 0
        self.inner_index = 0
        self.record_messages = record_messages
        self.transcript = Transcript()
        self.transcript.add_start(state_bits(self.states))

    # -- adversary-facing surface -----------------------------------------

    def pending_from(self, u: int) -> list[Msg]:
        """All queued messages whose next transmission leaves node ``u``."""
        return [m for (a, _), q in self.links.items() if a == u for m in q]

    # -- wire primitives ---------------------------------------------------

    def _send(self, phase: str, route: tuple[int, ...], hop: int,
              value: Value) -> None:
        sender = route[hop]
        if sender in self.faulty and self.adv.stationary:
            value = self.adv.outgoing(MsgCtx(phase, route, hop, value))
            if value not in (None, 0, 1):
                raise ValueError(
                    f"strategy {self.adv.name!r} emitted {value!r}; "
                    "only 0, 1 or None may go on the wire")
        edge = (sender, route[hop + 1])
        seq = self.next_seq[edge]
        self.next_seq[edge] = seq + 1
        self.links[edge].append(Msg(seq, phase, route, hop, value))
        self._active.add(edge)

    def _deliver_round(self, arrivals: dict, relay_inbox: list) -> None:
        """End of round: drain every loaded link in edge order, exactly once
        each.  Links without traffic this round are skipped; the drain order
        is still the global edge order, so sequencing is unchanged."""
        self.clock += 1
        for edge in sorted(self._active):
            q = self.links[edge]
            while q:
                m = q.popleft()
                if self.record_messages:
                    self.transcript.add_message(
                        self.outer_index, self.inner_index, self.clock, edge,
                        m.seq, m.phase, m.route, m.hop, m.value)
                if m.hop + 2 == len(m.route):
                    arrivals[m.route] = m.value
                else:
                    relay_inbox.append(m)
        self._active.clear()

    def _run_phase(self, phase, values_of) -> dict:
        """Drive one sub-protocol phase for its planned number of rounds.

        ``values_of`` yields (route, initial value) pairs.  Returns the value
        each route's final node received; every route lands within the phase
        because its length never exceeds the round allotment.
        """
        routes = sorted(values_of)
        arrivals: dict = {}
        relay_inbox: list[Msg] = []
        for rnd in range(phase.rounds):
            if rnd == 0:
                for route in routes:
                    self._send(phase.tag, route, 0, values_of[route])
            carried, relay_inbox = relay_inbox, []
            for m in carried:
                self._send(m.phase, m.route, m.hop + 1, m.value)
            if not self.adv.stationary:
                self.adv.script(self)
            self._deliver_round(arrivals, relay_inbox)
        assert not relay_inbox and len(arrivals) == len(routes), \
            "phase deadline passed with undelivered messages"
        return arrivals

    # -- protocol steps ----------------------------------------------------

    def run_iteration(self, plan) -> None:
        states = self.states
        for st in states:
            st.t = None
        for u in plan.stage_set:
            states[u].t = states[u].v

        catchup = None
        for ph in plan.phases:
            if ph.tag == "catchup":
                catchup = ph
            elif ph.tag == "equality":
                sends = {route: states[i].t
                         for (i, _), route in sorted(ph.routes.items())}
                got = self._run_phase(ph, sends)
                old = {j: states[j].t for j in ph.members}
                for j in ph.members:
                    own = old[j]
                    if own is None or any(
                            got[ph.routes[(i, j)]] != own
                            for i in ph.members if i != j):
                        states[j].t = None
            else:
                sends = {route: states[route[0]].t
                         for d in ph.targets for route in ph.paths[d]}
                got = self._run_phase(ph, sends)
                for d in ph.targets:
                    states[d].t = combine_propagate(
                        [got[route] for route in ph.paths[d]])

        for u in plan.adopt_set:
            t = states[u].t
            if t is not None:
                states[u].v = t

        if catchup is not None:
            sends = {(s, k): states[s].v
                     for k, senders in sorted(catchup.senders.items())
                     for s in senders}
            got = self._run_phase(catchup, sends)
            for k, senders in catchup.senders.items():
                val = combine_propagate([got[(s, k)] for s in senders])
                if val is not None:
                    states[k].v = val

    def run(self):
        """Execute the whole sweep; returns (decisions, transcript)."""
        g = self.g
        for o, F in enumerate(self.planner.outer()):
            self.outer_index = o
            for i, (X, Y) in enumerate(self.planner.splits(F)):
                self.inner_index = i
                plan = self.planner.plan(F, X, Y)
                before = self.clock
                self.run_iteration(plan)
                assert self.clock - before == plan.total_rounds
                self.transcript.add_iteration(o, i, self.clock,
                                              state_bits(self.states))
            if self.own_planner:
                self.planner.release(F)

        self.transcript.set_header(
            graph_obj=graph_to_json_obj(g), f=self.f, inputs=self.inputs,
            faulty=[g.names[u] for u in sorted(self.faulty)],
            strategy=self.adv.name, seed=self.seed, engine="full",
            planned_rounds=self.clock)
        decisions = {u: self.states[u].v for u in range(g.n)
                     if u not in self.faulty}
        self.transcript.set_result(
            {g.names[u]: v for u, v in decisions.items()}, self.clock)
        return decisions, self.transcript


def full_consensus(g: DiGraph, f: int, inputs, adversary: Optional[Adversary] = None,
                   *, seed: int = 0, check: bool = True,
                   planner: Optional[Planner] = None,
                   record_messages: bool = False):
    """Message-level counterpart of the scalar executor; same return shape."""
    world = World(g, f, inputs, adversary, seed=seed, check=check,
                  planner=planner, record_messages=record_messages)
    return world.run()
