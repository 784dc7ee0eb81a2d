import random

import pytest

from byzgraph.digraph import DiGraph


def letter_graph(spec, names):
    """Build a graph from 'a>b b>c ...' using single-letter node names."""
    idx = {nm: i for i, nm in enumerate(names)}
    edges = []
    for tok in spec.split():
        t, h = tok.split(">")
        edges.append((idx[t], idx[h]))
    return DiGraph(len(names), edges, names)


def random_graph(rng, n, p):
    edges = [(i, j) for i in range(n) for j in range(n)
             if i != j and rng.random() < p]
    return DiGraph(n, edges)


@pytest.fixture
def rng():
    return random.Random(0xC0FFEE)


@pytest.fixture(scope="session")
def c3():
    return letter_graph("a>b b>c c>a", ("a", "b", "c"))


@pytest.fixture(scope="session")
def clique_sink_4():
    # 4-clique v1..v4 plus a sink x with edges from every clique node.
    from byzgraph.generators import gen_clique_sink

    return gen_clique_sink(4)


@pytest.fixture(scope="session")
def two_clique_2():
    from byzgraph.generators import gen_two_clique

    return gen_two_clique(2)


@pytest.fixture(scope="session")
def k4():
    return DiGraph.complete(4)
