"""One-call execution wrapper: pick an engine, run, audit the transcript."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from ..digraph import DiGraph
from ..protocol.execution import bc_consensus
from ..protocol.plan import Planner
from .adversaries import Adversary
from .engine import full_consensus
from .monitors import MonitorVerdict, monitor_agreement, monitor_validity
from .transcript import Transcript

_MONITORS = {
    "validity": monitor_validity,
    "agreement": monitor_agreement,
}


@dataclass
class RunReport:
    decisions: dict[int, int]
    transcript: Transcript
    verdicts: list[MonitorVerdict]

    @property
    def ok(self) -> bool:
        return all(v.ok for v in self.verdicts)

    def failures(self) -> list[MonitorVerdict]:
        return [v for v in self.verdicts if not v.ok]


def run(g: DiGraph, f: int, inputs: Sequence[int],
        strategy: Optional[Adversary] = None, *, seed: int = 0,
        engine: str = "auto", check: bool = True,
        planner: Optional[Planner] = None, record_messages: bool = False,
        monitors: Sequence[str] = ("validity", "agreement")) -> RunReport:
    """Execute one consensus run and audit its transcript.

    ``engine='auto'`` uses the fast fold engine when the strategy is
    stationary and falls back to the message-level engine otherwise.  Each
    requested monitor is evaluated on the finished transcript and its verdict
    is both returned and appended to the transcript.
    """
    adv = strategy if strategy is not None else Adversary()
    if engine == "auto":
        engine = "fast" if adv.stationary else "full"
    if engine == "fast":
        if record_messages:
            raise ValueError(
                "message records need the message-level engine; "
                "pass engine='full'")
        decisions, tr = bc_consensus(g, f, inputs, adv, seed=seed,
                                     check=check, planner=planner)
    elif engine == "full":
        decisions, tr = full_consensus(g, f, inputs, adv, seed=seed,
                                       check=check, planner=planner,
                                       record_messages=record_messages)
    else:
        raise ValueError(
            f"unknown engine {engine!r}; expected 'auto', 'fast', or 'full'")
    verdicts = []
    for name in monitors:
        try:
            fn = _MONITORS[name]
        except KeyError:
            raise ValueError(
                f"unknown monitor {name!r}; "
                f"expected one of {sorted(_MONITORS)}") from None
        v = fn(tr)
        verdicts.append(v)
        tr.add_monitor(v.name, v.ok, v.detail)
    return RunReport(decisions, tr, verdicts)
