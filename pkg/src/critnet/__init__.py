"""critnet: critical node detection toolkit for sparse undirected networks."""

from critnet.graph import (
    ComponentPartition,
    Graph,
    GraphParseError,
    Solution,
    build_graph,
    connected_components,
    format_edge_list,
    gen_ba,
    gen_er,
    gen_ws,
    pairwise_connectivity,
    parse_edge_list,
    remove_nodes,
)

__version__ = "0.1.0"

__all__ = [
    "ComponentPartition",
    "Graph",
    "GraphParseError",
    "Solution",
    "build_graph",
    "connected_components",
    "format_edge_list",
    "gen_ba",
    "gen_er",
    "gen_ws",
    "pairwise_connectivity",
    "parse_edge_list",
    "remove_nodes",
    "__version__",
]
