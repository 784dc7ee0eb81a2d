"""byzgraph: feasibility checking and deterministic simulation of Byzantine
consensus on directed graphs."""

from .digraph import (
    DiGraph,
    PathSet,
    graph_dumps,
    graph_from_dot,
    graph_loads,
    graph_to_dot,
    incoming_neighbors,
    max_disjoint_paths,
    reduced_graph,
    scc_decomposition,
    source_component,
)

__version__ = "0.1.0"

__all__ = [
    "DiGraph",
    "PathSet",
    "graph_dumps",
    "graph_from_dot",
    "graph_loads",
    "graph_to_dot",
    "incoming_neighbors",
    "max_disjoint_paths",
    "reduced_graph",
    "scc_decomposition",
    "source_component",
    "__version__",
]
