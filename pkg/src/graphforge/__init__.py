"""Random graph generators with deterministic, partition-parallel seeding."""

from .core import AdjacencyGraph, DegreeSequence, Graph, graph_stats
from .errors import (BudgetExceededError, GraphForgeError, InfeasibleError,
                     InvalidParameterError, NonGraphicalError)
from .rand import RngStream

__version__ = "0.1.0"

__all__ = [
    "AdjacencyGraph",
    "BudgetExceededError",
    "DegreeSequence",
    "Graph",
    "GraphForgeError",
    "InfeasibleError",
    "InvalidParameterError",
    "NonGraphicalError",
    "RngStream",
    "graph_stats",
]
