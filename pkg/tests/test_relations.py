"""Tests for the neighbor-count and propagation relations."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from byzgraph.digraph import DiGraph
from byzgraph.relations import (
    arrow,
    arrow_mask,
    propagates,
    propagates_mask,
)

from conftest import letter_graph, random_graph
from oracles import brute_arrow, brute_propagates, brute_reachable


def ids(g, *names):
    return {g.node_id(x) for x in names}


# -- arrow -----------------------------------------------------------------


def test_arrow_clique_into_sink(clique_sink_4):
    assert arrow(clique_sink_4, range(4), {4}, f=1)
    assert not arrow(clique_sink_4, {4}, range(4), f=0)


def test_arrow_two_clique(two_clique_2):
    g = two_clique_2
    k1 = ids(g, *(f"u{i}" for i in range(1, 8)))
    k2 = ids(g, *(f"w{i}" for i in range(1, 8)))
    # Exactly u1, u2, u3, u7 have edges into the second clique.
    assert arrow(g, k1, k2, f=2)
    assert arrow(g, k1, k2, f=3)
    assert not arrow(g, k1, k2, f=4)


def test_arrow_empty_a_is_false(c3):
    assert not arrow(c3, set(), {0, 1}, f=0)


def test_arrow_rejects_bad_inputs(c3):
    with pytest.raises(ValueError):
        arrow(c3, {0, 1}, set(), f=1)
    with pytest.raises(ValueError):
        arrow(c3, {0, 1}, {1, 2}, f=1)
    with pytest.raises(ValueError):
        arrow(c3, {0}, {1}, f=-1)


def test_arrow_matches_bruteforce(rng):
    for _ in range(150):
        n = rng.randint(2, 6)
        g = random_graph(rng, n, rng.random())
        nodes = list(range(n))
        a_size = rng.randint(0, n - 1)
        a = set(rng.sample(nodes, a_size))
        rest = [u for u in nodes if u not in a]
        b = set(rng.sample(rest, rng.randint(1, len(rest))))
        f = rng.randint(0, 3)
        got = arrow(g, a, b, f)
        assert got == brute_arrow(g, a, b, f)
        amask = sum(1 << u for u in a)
        bmask = sum(1 << u for u in b)
        assert arrow_mask(g, amask, bmask, f) == got


# -- propagates ------------------------------------------------------------


def test_propagates_two_clique_worked_example(two_clique_2):
    g = two_clique_2
    F = ids(g, "u1", "u2")
    w_side = ids(g, *(f"w{i}" for i in range(1, 8)))
    u_rest = ids(g, *(f"u{i}" for i in range(3, 8)))

    cert = propagates(g, w_side, u_rest, F, f=2)
    assert cert.verdict and bool(cert)
    assert set(cert.path_sets) == u_rest
    for target, ps in cert.path_sets.items():
        assert ps.found == 3
        starts = [p[0] for p in ps.paths]
        assert len(set(starts)) == 3  # distinct sources
        ps.validate(g)

    rev = propagates(g, u_rest, w_side, F, f=2)
    assert not rev.verdict
    assert rev.failing_target == g.node_id("w1")
    assert rev.cut is not None and len(rev.cut) <= 2
    # The cut really separates: no remaining source reaches the target.
    blocked = set(F) | set(rev.cut)
    for s in u_rest - rev.cut:
        assert rev.failing_target not in brute_reachable(g, s, blocked)


def test_propagates_empty_target_is_true(c3):
    cert = propagates(c3, {0}, set(), set(), f=1)
    assert cert.verdict
    assert cert.path_sets == {}


def test_propagates_empty_sources(c3):
    cert = propagates(c3, set(), {1, 2}, set(), f=1)
    assert not cert.verdict
    assert cert.failing_target == 1
    assert cert.cut == frozenset()


def test_propagates_small_source_set(k4):
    # One source cannot yield two distinct-start paths, however well
    # connected; the source set itself is the certificate cut.
    cert = propagates(k4, {0}, {2, 3}, {1}, f=1)
    assert not cert.verdict
    assert cert.cut == frozenset({0})


def test_propagates_singleton_source_diamond():
    g = letter_graph("s>a s>b a>t b>t", ("s", "a", "b", "t"))
    # Two internally disjoint routes exist, but they share the lone source.
    cert = propagates(g, {0}, {3}, set(), f=1)
    assert not cert.verdict
    assert brute_propagates(g, {0}, {3}, set(), 1) is False


def test_propagates_rejects_bad_inputs(k4):
    with pytest.raises(ValueError):
        propagates(k4, {0, 1}, {1, 2}, set(), f=1)
    with pytest.raises(ValueError):
        propagates(k4, {0}, {1}, {2, 3}, f=1)  # |F| > f
    with pytest.raises(ValueError):
        propagates(k4, {0}, {1}, set(), f=-1)


def _random_partition(rng, n, max_f=3):
    """Random disjoint (A, B, F) with B non-empty, possibly leftovers."""
    nodes = list(range(n))
    rng.shuffle(nodes)
    a_size = rng.randint(0, n - 1)
    b_size = rng.randint(1, n - a_size)
    f_size = rng.randint(0, min(max_f, n - a_size - b_size))
    a = set(nodes[:a_size])
    b = set(nodes[a_size:a_size + b_size])
    fs = set(nodes[a_size + b_size:a_size + b_size + f_size])
    return a, b, fs


def test_propagates_matches_bruteforce(rng):
    for _ in range(200):
        n = rng.randint(2, 6)
        g = random_graph(rng, n, rng.random())
        a, b, fs = _random_partition(rng, n)
        f = rng.randint(len(fs), 3)
        cert = propagates(g, a, b, fs, f)
        want = brute_propagates(g, a, b, fs, f)
        assert cert.verdict == want, (g.edges, a, b, fs, f)
        amask = sum(1 << u for u in a)
        bmask = sum(1 << u for u in b)
        fmask = sum(1 << u for u in fs)
        assert propagates_mask(g, amask, bmask, fmask, f) == want
        lean = propagates(g, a, b, fs, f, want_paths=False)
        assert lean.verdict == want
        if cert.verdict:
            assert len(a) >= f + 1  # enough distinct sources exist
            assert set(cert.path_sets) == b
            for target, ps in cert.path_sets.items():
                ps.validate(g)
                assert ps.found == f + 1
                assert len({p[0] for p in ps.paths}) == f + 1
                assert not (set().union(*map(set, ps.paths)) & fs)
        else:
            t = cert.failing_target
            assert t in b
            assert cert.cut is not None and len(cert.cut) <= f
            blocked = fs | set(cert.cut)
            for s in a - cert.cut:
                assert t not in brute_reachable(g, s, blocked)


def test_propagates_transitive_closure(rng):
    hits = 0
    for _ in range(300):
        n = rng.randint(4, 7)
        g = random_graph(rng, n, 0.5 + 0.5 * rng.random())
        nodes = list(range(n))
        rng.shuffle(nodes)
        f = rng.randint(0, 2)
        cuts = sorted(rng.sample(range(1, n), 3))
        a = set(nodes[:cuts[0]])
        b = set(nodes[cuts[0]:cuts[1]])
        c = set(nodes[cuts[1]:cuts[2]])
        fs = set(nodes[cuts[2]:cuts[2] + min(f, n - cuts[2])])
        if not (a and b and c):
            continue
        if propagates(g, a, b, fs, f, want_paths=False).verdict and \
                propagates(g, a | b, c, fs, f, want_paths=False).verdict:
            hits += 1
            assert propagates(g, a, b | c, fs, f, want_paths=False).verdict, (
                g.edges, a, b, c, fs, f)
    assert hits >= 20  # the property was actually exercised


def test_propagates_monotone_in_sources(rng):
    for _ in range(150):
        n = rng.randint(3, 7)
        g = random_graph(rng, n, rng.random())
        a, b, fs = _random_partition(rng, n, max_f=2)
        f = rng.randint(len(fs), 2)
        if not propagates(g, a, b, fs, f, want_paths=False).verdict:
            continue
        spare = [u for u in range(n) if u not in a | b | fs]
        grown = a | set(rng.sample(spare, rng.randint(0, len(spare))))
        assert propagates(g, grown, b, fs, f, want_paths=False).verdict


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_propagates_agrees_with_oracle(data):
    n = data.draw(st.integers(2, 5))
    edges = data.draw(st.sets(
        st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)).filter(
            lambda e: e[0] != e[1]),
        max_size=n * (n - 1)))
    g = DiGraph(n, edges)
    labels = data.draw(st.lists(
        st.sampled_from(["a", "b", "f", "-"]), min_size=n, max_size=n))
    a = {u for u in range(n) if labels[u] == "a"}
    b = {u for u in range(n) if labels[u] == "b"}
    fs = {u for u in range(n) if labels[u] == "f"}
    f = data.draw(st.integers(len(fs), max(2, len(fs))))
    got = propagates(g, a, b, fs, f).verdict
    assert got == brute_propagates(g, a, b, fs, f)
