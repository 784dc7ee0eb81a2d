"""Execution transcripts: schema-versioned JSON lines, byte-reproducible.

A transcript is a header record followed by per-iteration state records,
optional per-message records, monitor verdicts, and one result record.  All
serialization is canonical (sorted keys, no whitespace), so identical runs
produce identical bytes — determinism tests compare transcripts directly.
"""

from __future__ import annotations

import json
from typing import Iterator, Optional

SCHEMA = "byzgraph-transcript/1"


def _canon(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


class Transcript:
    """Append-only record list with canonical JSON-lines rendering."""

    def __init__(self):
        self.header: Optional[dict] = None
        self.records: list[dict] = []

    # -- writers ----------------------------------------------------------

    def set_header(self, *, graph_obj: dict, f: int, inputs: list[int],
                   faulty: list[str], strategy: str, seed: int,
                   engine: str, planned_rounds: int) -> None:
        self.header = {
            "type": "header",
            "schema": SCHEMA,
            "graph": graph_obj,
            "f": f,
            "inputs": inputs,
            "faulty": faulty,
            "strategy": strategy,
            "seed": seed,
            "engine": engine,
            "planned_rounds": planned_rounds,
        }

    def add_start(self, vbits: str) -> None:
        self.records.append({"type": "start", "v": vbits})

    def add_iteration(self, outer: int, inner: int, clock: int,
                      vbits: str) -> None:
        self.records.append(
            {"type": "it", "o": outer, "i": inner, "r": clock, "v": vbits})

    def add_message(self, outer: int, inner: int, clock: int,
                    edge: tuple[int, int], seq: int, phase: str,
                    route: tuple[int, ...], hop: int, value) -> None:
        self.records.append({
            "type": "msg", "o": outer, "i": inner, "r": clock,
            "edge": list(edge), "seq": seq, "phase": phase,
            "route": list(route), "hop": hop, "val": value})

    def add_monitor(self, name: str, ok: bool, detail: Optional[str] = None) -> None:
        rec = {"type": "monitor", "name": name, "ok": ok}
        if detail is not None:
            rec["detail"] = detail
        self.records.append(rec)

    def set_result(self, decisions: dict[str, int], rounds: int) -> None:
        self.records.append(
            {"type": "result", "decisions": decisions, "rounds": rounds})

    # -- readers ----------------------------------------------------------

    def iterations(self) -> Iterator[dict]:
        for rec in self.records:
            if rec["type"] == "it":
                yield rec

    def start_bits(self) -> str:
        for rec in self.records:
            if rec["type"] == "start":
                return rec["v"]
        raise ValueError("transcript has no start record")

    def result(self) -> Optional[dict]:
        for rec in reversed(self.records):
            if rec["type"] == "result":
                return rec
        return None

    def monitor_records(self) -> list[dict]:
        return [r for r in self.records if r["type"] == "monitor"]

    # -- serialization ----------------------------------------------------

    def lines(self) -> Iterator[str]:
        if self.header is None:
            raise ValueError("transcript has no header")
        yield _canon(self.header)
        for rec in self.records:
            yield _canon(rec)

    def dumps(self) -> str:
        return "\n".join(self.lines()) + "\n"

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for line in self.lines():
                fh.write(line)
                fh.write("\n")

    @classmethod
    def loads(cls, text: str) -> "Transcript":
        t = cls()
        for line in text.splitlines():
            if not line.strip():
                continue
            rec = json.loads(line)
            if rec.get("type") == "header":
                if rec.get("schema") != SCHEMA:
                    raise ValueError(
                        f"unsupported transcript schema {rec.get('schema')!r}")
                t.header = rec
            else:
                t.records.append(rec)
        if t.header is None:
            raise ValueError("transcript has no header")
        return t

    @classmethod
    def load(cls, path) -> "Transcript":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.loads(fh.read())
