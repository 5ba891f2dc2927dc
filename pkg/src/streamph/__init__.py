"""Bounded-memory streaming persistent homology of Vietoris-Rips filtrations."""

__version__ = "0.1.0"

from .cliques import CliqueRegistry, maximal_filter, stream_simplices
from .edges import EdgeCursor, EdgeFile, compute_edges, external_sort_edges, next_edge
from .persistence import PersistenceState
from .types import Edge, Interval, Simplex, simplex_order

__all__ = [
    "CliqueRegistry",
    "Edge",
    "EdgeCursor",
    "EdgeFile",
    "Interval",
    "PersistenceState",
    "Simplex",
    "compute_edges",
    "external_sort_edges",
    "maximal_filter",
    "next_edge",
    "simplex_order",
    "stream_simplices",
]
