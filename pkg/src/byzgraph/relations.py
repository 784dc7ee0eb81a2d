"""Set-to-set relations that drive the feasibility checks.

Two relations matter.  The cheap one, :func:`arrow`, asks whether more than
``f`` distinct members of one set have an edge into the other.  The expensive
one, :func:`propagates`, asks whether every node of a target set is reachable
from the source set along ``f + 1`` vertex-disjoint paths that avoid a suspect
set ``F``.  Path families must start at distinct sources, so a source set of
size ``f`` or less can never propagate to a non-empty target.

:func:`propagates` is certifying in both directions: on success it carries a
path family per target, on failure a vertex cut of size at most ``f`` for the
first target that falls short.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from .digraph import DiGraph, PathSet, mask_of, max_disjoint_paths, nodes_of

__all__ = ["PropagateCert", "arrow", "propagates"]


def arrow(g: DiGraph, A: Iterable[int], B: Iterable[int], f: int) -> bool:
    """More than ``f`` distinct members of ``A`` have an out-edge into ``B``.

    ``B`` must be non-empty and disjoint from ``A``; an empty ``A`` simply
    yields False.
    """
    a = g.check_nodes(A)
    b = g.check_nodes(B)
    if not b:
        raise ValueError("B must be non-empty")
    if a & b:
        raise ValueError("A and B must be disjoint")
    if f < 0:
        raise ValueError("f must be non-negative")
    bmask = mask_of(b)
    count = 0
    for i in a:
        if g.out_mask(i) & bmask:
            count += 1
            if count > f:
                return True
    return False


@dataclass(frozen=True)
class PropagateCert:
    """Outcome of a propagation query, with evidence either way.

    When ``verdict`` is True, ``path_sets`` maps every target node to a
    family of ``f + 1`` vertex-disjoint paths from the sources (empty dict for
    an empty target set).  When False, ``failing_target`` names the first
    target (ascending) that falls short and ``cut`` is a vertex cut of size at
    most ``f`` separating the sources from it.
    """

    verdict: bool
    path_sets: dict[int, PathSet] = field(default_factory=dict)
    failing_target: Optional[int] = None
    cut: Optional[frozenset[int]] = None

    def __bool__(self) -> bool:
        return self.verdict


def _check_propagate_inputs(g: DiGraph, A, B, F, f):
    a = g.check_nodes(A)
    b = g.check_nodes(B)
    fs = g.check_nodes(F)
    if a & b or a & fs or b & fs:
        raise ValueError("A, B and F must be pairwise disjoint")
    if f < 0:
        raise ValueError("f must be non-negative")
    if len(fs) > f:
        raise ValueError(f"|F| = {len(fs)} exceeds the fault bound {f}")
    return a, b, fs


def propagates(g: DiGraph, A: Iterable[int], B: Iterable[int],
               F: Iterable[int], f: int,
               want_paths: bool = True) -> PropagateCert:
    """Does ``A`` propagate to ``B`` when ``F`` is suspect?

    True iff ``B`` is empty or every ``b`` in ``B`` admits ``f + 1``
    vertex-disjoint paths from distinct members of ``A`` that avoid ``F``.
    Set ``want_paths=False`` to skip materializing the per-target path
    families (the verdict and failure cut are unaffected).
    """
    a, b, fs = _check_propagate_inputs(g, A, B, F, f)
    if not b:
        return PropagateCert(True)
    if not a:
        return PropagateCert(False, failing_target=min(b), cut=frozenset())
    if len(a) <= f:
        # Fewer than f+1 possible distinct sources: blocking all of A is a
        # valid small cut for any target.
        return PropagateCert(False, failing_target=min(b), cut=frozenset(a))

    need = f + 1
    amask = mask_of(a)
    certs: dict[int, PathSet] = {}
    for target in sorted(b):
        direct = g.in_mask(target) & amask
        if direct.bit_count() >= need:
            if want_paths:
                starts = nodes_of(direct)[:need]
                certs[target] = PathSet(
                    frozenset(a), target,
                    tuple((s, target) for s in starts), frozenset(fs),
                    found=need)
            continue
        ps = max_disjoint_paths(g, a, target, fs, k=need,
                                want_paths=want_paths,
                                share_single_source=False)
        if ps.found < need:
            return PropagateCert(False, failing_target=target, cut=ps.cut)
        if want_paths:
            certs[target] = ps
    return PropagateCert(True, certs)


# -- mask-level fast paths -------------------------------------------------
#
# The partition scans evaluate propagation millions of times; these variants
# skip input checks and certificate construction and operate on node bitmasks
# directly.  Kept next to the reference implementation so the two can only
# drift where the tests would notice.


def propagates_mask(g: DiGraph, amask: int, bmask: int, fmask: int,
                    f: int) -> bool:
    """Verdict-only propagation on bitmasks; no validation, no certificates."""
    if not bmask:
        return True
    if amask.bit_count() <= f:
        return False
    need = f + 1
    flow_targets = []
    for target in nodes_of(bmask):
        if (g.in_mask(target) & amask).bit_count() >= need:
            continue
        # Disjoint paths end at distinct in-neighbors of the target, all of
        # which must avoid F; too few such neighbors rules the target out
        # without touching the flow solver.
        if (g.in_mask(target) & ~fmask).bit_count() < need:
            return False
        flow_targets.append(target)
    if not flow_targets:
        return True
    srcs = nodes_of(amask)
    exc = nodes_of(fmask)
    for target in flow_targets:
        ps = max_disjoint_paths(g, srcs, target, exc, k=need,
                                want_paths=False, share_single_source=False)
        if ps.found < need:
            return False
    return True


def arrow_mask(g: DiGraph, amask: int, bmask: int, f: int) -> bool:
    """Verdict-only neighbor-count relation on bitmasks."""
    count = 0
    for i in nodes_of(amask):
        if g.out_mask(i) & bmask:
            count += 1
            if count > f:
                return True
    return False
