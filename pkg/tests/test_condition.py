"""Tests for the feasibility checkers and their witnesses."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from byzgraph.condition import (
    check_arrow_condition,
    check_degree_bounds,
    check_propagation_condition,
    equivalence_fuzz,
)
from byzgraph.digraph import DiGraph, scc_decomposition
from byzgraph.generators import gen_clique_sink, gen_two_clique

from conftest import letter_graph, random_graph
from oracles import (
    brute_check_arrow_condition,
    brute_check_propagation_condition,
)


# -- named graphs ----------------------------------------------------------


def test_clique_sink_satisfied_at_f1(clique_sink_4):
    v = check_propagation_condition(clique_sink_4, 1)
    assert v.satisfied
    assert v.witness is None
    a = check_arrow_condition(clique_sink_4, 1)
    assert a.satisfied


def test_clique_sink_violated_at_f2(clique_sink_4):
    v = check_propagation_condition(clique_sink_4, 2)
    assert not v.satisfied
    assert v.screened == "size-bound"  # n=5 < 7
    v.witness.validate(clique_sink_4, 2)
    assert not check_arrow_condition(clique_sink_4, 2).satisfied


def test_c3_violated_with_singleton_witness(c3):
    v = check_propagation_condition(c3, 1)
    assert not v.satisfied
    assert len(v.witness.A) == 1 and len(v.witness.B) == 1
    v.witness.validate(c3, 1)


def test_k4_satisfied_at_f1(k4):
    assert check_propagation_condition(k4, 1).satisfied
    assert check_arrow_condition(k4, 1).satisfied


def test_two_clique_screen_and_arrow_form(two_clique_2):
    # The full propagation scan of this graph runs in the acceptance suite;
    # here the cheap equivalent form plus the necessary screens.
    assert check_degree_bounds(two_clique_2, 2).ok
    v = check_arrow_condition(two_clique_2, 2)
    assert v.satisfied


# -- degree screen ---------------------------------------------------------


def test_degree_bounds_size_clause(c3):
    chk = check_degree_bounds(c3, 1)
    assert not chk.ok and chk.node is None
    assert "3f+1" in chk.detail


def test_degree_bounds_in_degree_clause():
    # Seven nodes, f=2: node 6 only has 2 incoming neighbors, needs 5.
    g = DiGraph(7, [(i, j) for i in range(6) for j in range(6) if i != j]
                + [(0, 6), (1, 6), (6, 0)])
    chk = check_degree_bounds(g, 2)
    assert not chk.ok and chk.node == 6
    assert "incoming" in chk.detail


def test_degree_bounds_pass(clique_sink_4, two_clique_2):
    assert check_degree_bounds(clique_sink_4, 1).ok
    assert check_degree_bounds(two_clique_2, 2).ok
    # f=0 needs no in-degree at all, only n >= 1.
    assert check_degree_bounds(DiGraph(2, [(0, 1)]), 0).ok


def test_screen_witness_for_low_degree_node():
    g = DiGraph(7, [(i, j) for i in range(6) for j in range(6) if i != j]
                + [(0, 6), (1, 6), (6, 0)])
    v = check_propagation_condition(g, 2)
    assert not v.satisfied
    assert v.screened == "in-degree"
    assert v.witness.A == frozenset({6})
    v.witness.validate(g, 2)


# -- canonical scan behavior -----------------------------------------------


def test_partition_count_on_satisfied_graph(k4):
    v = check_propagation_condition(k4, 1)
    # F=empty: 2^3-1 splits; |F|=1: four suspects x (2^2-1) splits.
    assert v.partitions_examined == 7 + 4 * 3


def test_witness_matches_bruteforce_order(rng):
    for _ in range(40):
        n = rng.randint(2, 5)
        g = random_graph(rng, n, rng.random())
        f = rng.randint(0, 2)
        v = check_propagation_condition(g, f, screen=False)
        ok, wit = brute_check_propagation_condition(g, f)
        assert v.satisfied == ok
        if not ok:
            assert (v.witness.A, v.witness.B, v.witness.F) == wit
            v.witness.validate(g, f)


def test_screen_never_changes_the_verdict(rng):
    for _ in range(40):
        n = rng.randint(2, 5)
        g = random_graph(rng, n, rng.random())
        f = rng.randint(0, 2)
        with_screen = check_propagation_condition(g, f)
        without = check_propagation_condition(g, f, screen=False)
        assert with_screen.satisfied == without.satisfied
        if not with_screen.satisfied:
            with_screen.witness.validate(g, f)


def test_arrow_matches_bruteforce(rng):
    for _ in range(40):
        n = rng.randint(2, 5)
        g = random_graph(rng, n, rng.random())
        f = rng.randint(0, 2)
        v = check_arrow_condition(g, f)
        ok, _ = brute_check_arrow_condition(g, f)
        assert v.satisfied == ok
        if not ok:
            v.witness.validate(g, f)


def test_parallel_scan_matches_sequential(k4):
    seq = check_propagation_condition(k4, 1, jobs=1)
    par = check_propagation_condition(k4, 1, jobs=2)
    assert (seq.satisfied, seq.partitions_examined) == \
        (par.satisfied, par.partitions_examined)

    cycle = letter_graph("a>b b>c c>d d>a", ("a", "b", "c", "d"))
    seq = check_propagation_condition(cycle, 1, screen=False, jobs=1)
    par = check_propagation_condition(cycle, 1, screen=False, jobs=2)
    assert not seq.satisfied
    assert (seq.witness, seq.partitions_examined) == \
        (par.witness, par.partitions_examined)


def test_rejects_bad_inputs(k4):
    with pytest.raises(ValueError):
        check_propagation_condition(DiGraph(1, []), 0)
    with pytest.raises(ValueError):
        check_propagation_condition(k4, -1)
    with pytest.raises(ValueError):
        check_arrow_condition(k4, -1)
    with pytest.raises(ValueError):
        check_degree_bounds(k4, -1)


# -- structural properties -------------------------------------------------


def test_violation_is_monotone_in_f(rng):
    for _ in range(30):
        n = rng.randint(3, 6)
        g = random_graph(rng, n, rng.random())
        f = rng.randint(0, 1)
        if check_propagation_condition(g, f).satisfied:
            continue
        assert not check_propagation_condition(g, f + 1).satisfied


def test_f0_matches_source_component_reachability(rng):
    # With no faults the condition collapses to: one source component that
    # reaches every node.
    for _ in range(60):
        n = rng.randint(2, 6)
        g = random_graph(rng, n, rng.random())
        scc = scc_decomposition(g)
        sources = [i for i in range(len(scc.components))
                   if all(b != i for (_, b) in scc.dag_edges)]
        reach_all = False
        if len(sources) == 1:
            seen = set(scc.components[sources[0]])
            frontier = list(seen)
            while frontier:
                u = frontier.pop()
                for w in g.out_neighbors(u):
                    if w not in seen:
                        seen.add(w)
                        frontier.append(w)
            reach_all = len(seen) == g.n
        got = check_propagation_condition(g, 0).satisfied
        assert got == reach_all, sorted(g.edges)


# -- checker agreement -----------------------------------------------------


def test_fuzz_exhaustive_n3():
    rep = equivalence_fuzz(3, 1, mode="exhaustive")
    assert rep.agreed and rep.checked == 64
    assert rep.disagreement is None


def test_fuzz_random_n5():
    rep = equivalence_fuzz(5, 1, mode="random", trials=60, seed=7)
    assert rep.agreed and rep.checked == 60


def test_fuzz_rejects_bad_modes():
    with pytest.raises(ValueError):
        equivalence_fuzz(5, 1, mode="exhaustive")
    with pytest.raises(ValueError):
        equivalence_fuzz(3, 1, mode="sideways")


@settings(max_examples=50, deadline=None)
@given(st.data())
def test_checkers_agree_on_arbitrary_graphs(data):
    n = data.draw(st.integers(2, 4))
    edges = data.draw(st.sets(
        st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)).filter(
            lambda e: e[0] != e[1]),
        max_size=n * (n - 1)))
    g = DiGraph(n, edges)
    f = data.draw(st.integers(0, 2))
    a = check_propagation_condition(g, f, screen=False)
    b = check_arrow_condition(g, f)
    assert a.satisfied == b.satisfied
