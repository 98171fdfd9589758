""".. include:: ../../docs/templates/graph.md"""

from .schema import NodeType, RelationSchema, TaskKind, TaskSpec, GraphSchema
from .hetero_graph import EdgeSet, TaskTargets, HeteroGraph
from .io import load_graph, write_graph
from .validate import Finding, ValidationReport, validate
from .split import Split, SplitAssignment, split_targets
from .sampling import neighborhood_subgraph, sample_subgraph, resolve_budgets, HopBudgets
from .exceptions import (
    GraphLoadError,
    SchemaError,
    SplitError,
    SamplingError,
    LabelStarvation,
)

__all__ = [
    "NodeType",
    "RelationSchema",
    "TaskKind",
    "TaskSpec",
    "GraphSchema",
    "EdgeSet",
    "TaskTargets",
    "HeteroGraph",
    "load_graph",
    "write_graph",
    "Finding",
    "ValidationReport",
    "validate",
    "Split",
    "SplitAssignment",
    "split_targets",
    "neighborhood_subgraph",
    "sample_subgraph",
    "resolve_budgets",
    "HopBudgets",
    "GraphLoadError",
    "SchemaError",
    "SplitError",
    "SamplingError",
    "LabelStarvation",
]
