"""Transcript auditors for the two consensus guarantees.

Both monitors work purely from the serialized run record, so they can audit a
transcript produced by any engine -- and equally well catch a hand-edited one,
which the negative-control tests rely on.  A verdict carries the first
violating round when it fails.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from ..protocol.plan import suspect_sets
from .transcript import Transcript


@dataclass(frozen=True)
class MonitorVerdict:
    name: str
    ok: bool
    detail: Optional[str] = None

    def __bool__(self) -> bool:
        return self.ok


def _faulty_ids(tr: Transcript, faulty: Optional[Iterable[int]]) -> frozenset[int]:
    if faulty is not None:
        return frozenset(faulty)
    names = tr.header["graph"]["nodes"]
    return frozenset(names.index(nm) for nm in tr.header["faulty"])


def monitor_validity(tr: Transcript, faulty: Optional[Iterable[int]] = None) -> MonitorVerdict:
    """Check that every fault-free node ends each iteration holding a value
    some fault-free node held when that iteration began.

    ``faulty`` overrides the faulty set recorded in the header (node ids).
    """
    bad = _faulty_ids(tr, faulty)
    prev = tr.start_bits()
    free = [j for j in range(len(prev)) if j not in bad]
    for rec in tr.iterations():
        cur = rec["v"]
        allowed = {prev[j] for j in free}
        for j in free:
            if cur[j] not in allowed:
                return MonitorVerdict(
                    "validity", False,
                    f"round {rec['r']}: node {j} ended the iteration with "
                    f"{cur[j]}, which no fault-free node held at its start")
        prev = cur
    return MonitorVerdict("validity", True)


def monitor_agreement(tr: Transcript, faulty: Optional[Iterable[int]] = None) -> MonitorVerdict:
    """Check that once the outer sweep has processed the suspect set equal to
    the real faulty set, all fault-free values are identical and stay that way
    for the rest of the run.

    ``faulty`` overrides the faulty set recorded in the header (node ids).
    """
    bad = _faulty_ids(tr, faulty)
    n = len(tr.header["graph"]["nodes"])
    f = tr.header["f"]
    order = [frozenset(F) for F in suspect_sets(n, f)]
    try:
        fidx = order.index(bad)
    except ValueError:
        return MonitorVerdict(
            "agreement", False,
            f"faulty set {sorted(bad)} exceeds the declared bound f={f}")
    records = list(tr.iterations())
    last_at = None
    for k, rec in enumerate(records):
        if rec["o"] == fidx:
            last_at = k
    if last_at is None:
        return MonitorVerdict(
            "agreement", False,
            f"transcript has no iteration for suspect block {fidx}")
    free = [j for j in range(n) if j not in bad]
    agreed = None
    for rec in records[last_at:]:
        vals = {rec["v"][j] for j in free}
        if len(vals) != 1:
            return MonitorVerdict(
                "agreement", False,
                f"round {rec['r']}: fault-free nodes hold both 0 and 1 after "
                f"the deciding sweep")
        val = vals.pop()
        if agreed is None:
            agreed = val
        elif val != agreed:
            return MonitorVerdict(
                "agreement", False,
                f"round {rec['r']}: the agreed value changed from {agreed} "
                f"to {val}")
    return MonitorVerdict("agreement", True)
