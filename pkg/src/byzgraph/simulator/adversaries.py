"""Byzantine adversary strategies.

A strategy controls what the faulty nodes put on the wire.  Whenever a
scheduled message is about to leave a faulty node — as the original source or
as a relay hop — the engine asks the strategy for the value to transmit
instead of the honest one.  ``None`` plays the role of the undefined value
(equivalently: staying silent, since a missing message reads as undefined at
the deadline).

Strategies see the full messaging context and are bound to the graph, the
fault bound, and a seed before the run starts, so they can be as informed as
the failure model allows.  All strategies here except :class:`ScriptedStrategy`
are *stationary*: the transmitted value is a pure function of the message
context (phase, route, hop, honest value) and the binding — deliberately not
of the iteration counters.  That makes a faulty relay behave identically
every time the same route carries the same value, which the batched evaluator
exploits by collapsing each route into a 3-entry transfer table.  Scripted
strategies may instead rewrite outbound messages arbitrarily each round and
therefore only run on the message-level engine.
"""

from __future__ import annotations

from typing import Callable, NamedTuple, Optional

Value = Optional[int]  # 0, 1, or None for the undefined value


class MsgCtx(NamedTuple):
    """Everything a stationary strategy may condition on for one hop."""

    phase: str                 # "feed" | "equality" | "spread" | "catchup"
    route: tuple[int, ...]     # the full planned path, source to target
    hop: int                   # index of the transmitting node within route
    value: Value               # what an honest node would transmit here

    @property
    def sender(self) -> int:
        return self.route[self.hop]

    @property
    def receiver(self) -> int:
        return self.route[self.hop + 1]

    @property
    def target(self) -> int:
        return self.route[-1]


class Adversary:
    """Base strategy: controls the given faulty set, behaves honestly.

    Subclasses override :meth:`outgoing`.  ``stationary`` is False for
    strategies that need the message-level engine's per-round hook.
    """

    name = "honest"
    stationary = True

    def __init__(self, faulty=()):
        self.faulty = frozenset(faulty)
        self.g = None
        self.f = None
        self.seed = 0

    def bind(self, g, f: int, seed: int = 0) -> "Adversary":
        """Attach graph knowledge; returns self for chaining."""
        if len(self.faulty) > f:
            raise ValueError(f"{len(self.faulty)} faulty nodes exceed f={f}")
        bad = [u for u in self.faulty if not (0 <= u < g.n)]
        if bad:
            raise ValueError(f"faulty nodes {bad} not in the graph")
        self.g = g
        self.f = f
        self.seed = seed
        return self

    def outgoing(self, ctx: MsgCtx) -> Value:
        return ctx.value

    def describe(self) -> dict:
        return {"strategy": self.name,
                "faulty": sorted(self.faulty), "seed": self.seed}


class SilentStrategy(Adversary):
    """Faulty nodes never transmit; receivers read the undefined value."""

    name = "silent"

    def outgoing(self, ctx: MsgCtx) -> Value:
        return None


class FlipStrategy(Adversary):
    """Faulty nodes negate every bit they would carry; silence stays silent."""

    name = "flip"

    def outgoing(self, ctx: MsgCtx) -> Value:
        return None if ctx.value is None else 1 - ctx.value


class EquivocateStrategy(Adversary):
    """Different lies on different routes: a cheap deterministic parity of
    the route identity picks 0 or 1, so disjoint paths toward one target
    disagree with each other."""

    name = "equivocate"

    def outgoing(self, ctx: MsgCtx) -> Value:
        acc = len(ctx.route)
        for x in ctx.route:
            acc = (acc * 131 + x) & 0xFFFFFFFF
        return acc & 1


class SplitBrainStrategy(Adversary):
    """Tell the two halves of the node-id space different stories: routes
    toward low-index targets hear 0, the rest hear 1."""

    name = "split-brain"

    def outgoing(self, ctx: MsgCtx) -> Value:
        return 0 if 2 * ctx.target < self.g.n else 1


def _mix64(x: int) -> int:
    x &= (1 << 64) - 1
    x ^= x >> 12
    x = (x ^ (x << 25)) & ((1 << 64) - 1)
    x ^= x >> 27
    return (x * 0x2545F4914F6CDD1D) & ((1 << 64) - 1)


class RandomStrategy(Adversary):
    """Pseudo-random but stateless misbehavior: the transmitted value is a
    hash of (seed, context) over {0, 1, undefined}, so the same hop in the
    same situation always lies the same way."""

    name = "random"

    _PHASE_ID = {"feed": 1, "equality": 2, "spread": 3, "catchup": 4}

    def outgoing(self, ctx: MsgCtx) -> Value:
        h = self.seed or 0x9E3779B97F4A7C15
        h = _mix64(h ^ self._PHASE_ID[ctx.phase])
        for x in ctx.route:
            h = _mix64(h ^ (x + 1))
        h = _mix64(h ^ (ctx.hop + 1))
        h = _mix64(h ^ (0 if ctx.value is None else ctx.value + 1))
        return (None, 0, 1)[h % 3]


class ScriptedStrategy(Adversary):
    """Full-power hook for the message-level engine: ``script(world)`` runs
    once per round after honest sends are queued and may rewrite any pending
    message leaving a faulty node (see ``World.pending_from``)."""

    name = "scripted"
    stationary = False

    def __init__(self, faulty, script: Callable):
        super().__init__(faulty)
        self.script = script

    def outgoing(self, ctx: MsgCtx) -> Value:  # pragma: no cover - unused
        return ctx.value


def strategy_pool(faulty) -> list[Adversary]:
    """The fixed scripted-strategy pool used by the protocol fuzz tests."""
    return [
        SilentStrategy(faulty),
        FlipStrategy(faulty),
        EquivocateStrategy(faulty),
        SplitBrainStrategy(faulty),
    ]
