"""Deterministic synchronous-network simulation: adversaries, transcripts,
monitors, and the message-level round engine.

Only the leaf modules are re-exported here; the round engine and runner sit
behind explicit imports (``byzgraph.simulator.engine``,
``byzgraph.simulator.runner``) because they depend on the protocol package.
"""

from .adversaries import (
    Adversary,
    EquivocateStrategy,
    FlipStrategy,
    MsgCtx,
    RandomStrategy,
    ScriptedStrategy,
    SilentStrategy,
    SplitBrainStrategy,
    strategy_pool,
)
from .transcript import Transcript

__all__ = [
    "Adversary",
    "EquivocateStrategy",
    "FlipStrategy",
    "MsgCtx",
    "RandomStrategy",
    "ScriptedStrategy",
    "SilentStrategy",
    "SplitBrainStrategy",
    "Transcript",
    "strategy_pool",
]
