"""Locating the source of an SI epidemic from a single snapshot of infected nodes."""

from .graph import (
    DisconnectedSnapshotError,
    Graph,
    GraphFormatError,
    NodeSet,
    bfs_distances,
    cut_volume,
    from_edge_list,
    induced_connectivity,
    read_edge_list,
    two_path_volume,
)
from .ranking import Ranking

__version__ = "0.1.0"

__all__ = [
    "DisconnectedSnapshotError",
    "Graph",
    "GraphFormatError",
    "NodeSet",
    "Ranking",
    "bfs_distances",
    "cut_volume",
    "from_edge_list",
    "induced_connectivity",
    "read_edge_list",
    "two_path_volume",
    "__version__",
]
