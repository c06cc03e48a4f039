"""Continuous subgraph queries over dynamic multi-relational graphs."""

from .engine import ContinuousQueryEngine, EngineConfig, MatchRecord
from .errors import SJStreamError
from .graph import DynamicGraph, Schema, TemporalEdge
from .query import QueryGraph, QueryVertex, SJTree, build_sjtree, validate_sjtree

__version__ = "0.1.0"

__all__ = [
    "ContinuousQueryEngine",
    "DynamicGraph",
    "EngineConfig",
    "MatchRecord",
    "QueryGraph",
    "QueryVertex",
    "SJTree",
    "Schema",
    "SJStreamError",
    "TemporalEdge",
    "build_sjtree",
    "validate_sjtree",
    "__version__",
]
