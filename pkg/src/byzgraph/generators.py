"""Constructors for the named graph families used in tests and demos, plus a
seeded random-digraph generator.

The random generator is spelled out exactly (xorshift64*, one draw per
ordered node pair in ascending order) so that fixtures can be reproduced
byte-for-byte by reimplementations in other languages.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .digraph import DiGraph


@dataclass(frozen=True)
class FamilySpec:
    """Parameters naming one generated graph: which family plus the knobs the
    family uses (others stay None)."""

    family: str  # "two-clique" | "clique-sink" | "random" | "complete"
    f: Optional[int] = None
    k: Optional[int] = None
    n: Optional[int] = None
    p: Optional[float] = None
    seed: Optional[int] = None

    def build(self) -> DiGraph:
        if self.family == "two-clique":
            return gen_two_clique(self.f)
        if self.family == "clique-sink":
            return gen_clique_sink(self.k)
        if self.family == "random":
            return gen_random(self.n, self.p, self.seed or 0)
        if self.family == "complete":
            return DiGraph.complete(self.n)
        raise ValueError(f"unknown family {self.family!r}")


def gen_two_clique(f: int) -> DiGraph:
    """Two complete digraphs K1 = {u1..u_(3f+1)} and K2 = {w1..w_(3f+1)}
    joined by sparse one-way links: u_i -> w_i for i in 1..3f/2 and i = 3f+1,
    and w_i -> u_i for i in 3f/2+1..3f and i = 3f+1.

    Requires f positive and even (so the cross links split evenly).  Total
    node count is 6f+2.  The family is the standard witness that consensus
    can be feasible even though neither direction of the clique cut carries
    2f+1 links.
    """
    if f <= 0 or f % 2:
        raise ValueError("two-clique family requires positive even f")
    m = 3 * f + 1
    names = [f"u{i}" for i in range(1, m + 1)] + [f"w{i}" for i in range(1, m + 1)]
    u = lambda i: i - 1            # noqa: E731 - u_i index
    w = lambda i: m + i - 1        # noqa: E731 - w_i index
    edges = []
    for i in range(1, m + 1):
        for j in range(1, m + 1):
            if i != j:
                edges.append((u(i), u(j)))
                edges.append((w(i), w(j)))
    for i in list(range(1, 3 * f // 2 + 1)) + [m]:
        edges.append((u(i), w(i)))
    for i in list(range(3 * f // 2 + 1, 3 * f + 1)) + [m]:
        edges.append((w(i), u(i)))
    return DiGraph(2 * m, edges, names)


def gen_clique_sink(k: int) -> DiGraph:
    """A complete digraph v1..vk plus a sink x that hears every clique node
    but says nothing."""
    if k < 2:
        raise ValueError("clique-sink family requires k >= 2")
    names = [f"v{i}" for i in range(1, k + 1)] + ["x"]
    edges = [(i, j) for i in range(k) for j in range(k) if i != j]
    edges += [(i, k) for i in range(k)]
    return DiGraph(k + 1, edges, names)


_MASK64 = (1 << 64) - 1


def _xorshift64star(state: int) -> tuple[int, int]:
    """One step of xorshift64*: returns (new_state, output).

    state' = state ^= state >> 12; ^= state << 25; ^= state >> 27 (64-bit),
    output = state' * 0x2545F4914F6CDD1D mod 2^64.
    """
    x = state & _MASK64
    x ^= x >> 12
    x = (x ^ (x << 25)) & _MASK64
    x ^= x >> 27
    return x, (x * 0x2545F4914F6CDD1D) & _MASK64


def gen_random(n: int, p: float, seed: int) -> DiGraph:
    """Random simple digraph: each ordered pair (i, j), i != j, taken in
    ascending (i, j) order, is included independently when the next
    xorshift64* draw, scaled to [0, 1), falls below p.

    A zero seed is replaced by the golden-ratio constant 0x9E3779B97F4A7C15
    (xorshift states must be non-zero).
    """
    if not (0 <= p <= 1):
        raise ValueError("edge probability must be within [0, 1]")
    if n < 0:
        raise ValueError("n must be non-negative")
    state = (seed & _MASK64) or 0x9E3779B97F4A7C15
    edges = []
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            state, out = _xorshift64star(state)
            if out / 2.0**64 < p:
                edges.append((i, j))
    return DiGraph(n, edges)
