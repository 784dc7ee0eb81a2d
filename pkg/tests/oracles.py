"""Independent brute-force reference implementations.

Everything in here is deliberately naive: exhaustive path enumeration,
literal partition scans, reachability by repeated squaring of the adjacency
relation.  The real library must agree with these on small instances; none of
this code is imported by the library itself.
"""

from itertools import combinations


def edge_set(g):
    return set(g.edges)


def simple_paths(g, sources, target, excluded):
    """Every simple directed path from any source to the target that avoids
    `excluded`.  The target may not be a source.  Paths are returned sorted by
    (length, node tuple) so callers iterate deterministically."""
    edges = edge_set(g)
    excluded = set(excluded)
    out = []

    def extend(path, seen):
        u = path[-1]
        for v in range(g.n):
            if (u, v) not in edges or v in excluded or v in seen:
                continue
            if v == target:
                out.append(tuple(path + [v]))
            else:
                extend(path + [v], seen | {v})

    for s in sorted(sources):
        if s == target or s in excluded:
            continue
        extend([s], {s})
    out.sort(key=lambda p: (len(p), p))
    return out


def _disjoint_ok(path, used, shared_source):
    # Interior nodes plus the start must be fresh; the target is shared.
    body = path[:-1]
    if shared_source is not None and path[0] == shared_source:
        body = path[1:-1]
    return all(u not in used for u in body)


def _family_nodes(path, shared_source):
    body = path[:-1]
    if shared_source is not None and path[0] == shared_source:
        body = path[1:-1]
    return body


def brute_max_disjoint_paths(g, sources, target, excluded=(), cap=None,
                             share_single=True):
    """Size of the largest family of pairwise vertex-disjoint (sources, target)
    paths avoiding `excluded`.  Paths share only the target; with a single
    source they also share that source unless `share_single` is False, in
    which case paths must start at distinct sources (so one source supports at
    most one path).  Pure backtracking over all simple paths."""
    sources = set(sources)
    shared_source = (
        next(iter(sources)) if len(sources) == 1 and share_single else None
    )
    paths = simple_paths(g, sources, target, excluded)
    limit = len(paths) if cap is None else cap
    best = 0

    def search(idx, used, size):
        nonlocal best
        if size > best:
            best = size
        if best >= limit:
            return
        if size + (len(paths) - idx) <= best:
            return
        for i in range(idx, len(paths)):
            p = paths[i]
            if _disjoint_ok(p, used, shared_source):
                add = _family_nodes(p, shared_source)
                search(i + 1, used | set(add), size + 1)

    search(0, set(), 0)
    return min(best, limit) if cap is not None else best


def brute_propagates(g, A, B, F, f):
    """Literal propagate check: B empty, or every b in B has f+1 disjoint
    (A, b)-paths avoiding F.  Paths start at distinct members of A, so a
    singleton A can never propagate for f >= 1."""
    if not B:
        return True
    if not A:
        return False
    for b in sorted(B):
        count = brute_max_disjoint_paths(
            g, A, b, F, cap=f + 1, share_single=False
        )
        if count < f + 1:
            return False
    return True


def brute_arrow(g, X, Y, f):
    """Literal neighbor-count relation: more than f distinct members of X have
    an edge into Y."""
    edges = edge_set(g)
    hits = {i for i in X if any((i, j) in edges for j in Y)}
    return len(hits) > f


def brute_check_propagation_condition(g, f):
    """Literal scan of every (A, B, F) partition; returns (satisfied, witness).
    The witness is the first failing partition in F-size/lex then bitmask
    order, matching the library's canonical order."""
    n = g.n
    nodes = list(range(n))
    for fsize in range(f + 1):
        for F in combinations(nodes, fsize):
            rest = [u for u in nodes if u not in F]
            if len(rest) < 2:
                continue
            k = len(rest)
            for m in range(1, 1 << (k - 1)):
                B = {rest[i + 1] for i in range(k - 1) if (m >> i) & 1}
                A = set(rest) - B
                if not brute_propagates(g, A, B, set(F), f) and not brute_propagates(
                    g, B, A, set(F), f
                ):
                    return False, (frozenset(A), frozenset(B), frozenset(F))
    return True, None


def brute_check_arrow_condition(g, f):
    """Literal scan of every (L, C, R, F) partition with L, R non-empty."""
    n = g.n
    nodes = list(range(n))
    for fsize in range(f + 1):
        for F in combinations(nodes, fsize):
            rest = [u for u in nodes if u not in F]
            k = len(rest)
            # Assign each remaining node to L (0), C (1) or R (2).
            for code in range(3**k):
                L, C, R = set(), set(), set()
                c = code
                for u in rest:
                    (L, C, R)[c % 3].add(u)
                    c //= 3
                if not L or not R:
                    continue
                if not brute_arrow(g, L | C, R, f) and not brute_arrow(
                    g, R | C, L, f
                ):
                    return False, (
                        frozenset(L),
                        frozenset(C),
                        frozenset(R),
                        frozenset(F),
                    )
    return True, None


def brute_reachable(g, start, excluded=()):
    """Nodes reachable from `start` (inclusive) without touching `excluded`."""
    edges = edge_set(g)
    excluded = set(excluded)
    seen = {start}
    frontier = [start]
    while frontier:
        u = frontier.pop()
        for v in range(g.n):
            if (u, v) in edges and v not in excluded and v not in seen:
                seen.add(v)
                frontier.append(v)
    return seen


def brute_sccs(g):
    """Strongly connected components via mutual reachability, as a set of
    frozensets."""
    comps = []
    assigned = set()
    for u in range(g.n):
        if u in assigned:
            continue
        ru = brute_reachable(g, u)
        comp = {v for v in ru if u in brute_reachable(g, v)}
        comps.append(frozenset(comp))
        assigned |= comp
    return set(comps)


def brute_source_components(g, F, F1):
    """Source components of the reduced graph (F removed, F1 outgoing edges
    removed), as frozensets of original node ids."""
    keep = [u for u in range(g.n) if u not in set(F)]
    kept_edges = {
        (u, v)
        for (u, v) in g.edges
        if u in keep and v in keep and u not in set(F1)
    }

    class _G:
        pass

    h = _G()
    h.n = g.n
    h.edges = kept_edges
    # brute_sccs ranges over all of 0..n-1, so removed nodes show up as
    # isolated singleton components; drop those.
    comps = {c for c in brute_sccs(h) if all(u in keep for u in c)}
    sources = set()
    for c in comps:
        incoming = any(v in c and u not in c for (u, v) in kept_edges)
        if not incoming:
            sources.add(c)
    return sources
