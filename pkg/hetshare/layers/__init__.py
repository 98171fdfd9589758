""".. include:: ../../docs/templates/layers.md"""

from .params import ParameterStore, param_path, split_path, role_family, initial_value
from .batch import GraphBatch, RelationIndex
from .trace import AttentionTrace, TraceRecord, ALPHA, BETA, GATE
from .stages import (
    RelationEmbedding,
    project_features,
    message,
    relation_aggregate,
    gate_weights,
    gate_combine,
    cross_relation_aggregate,
    stage,
    RESIDUAL_SLOPE,
)

__all__ = [
    "ParameterStore",
    "param_path",
    "split_path",
    "role_family",
    "initial_value",
    "GraphBatch",
    "RelationIndex",
    "AttentionTrace",
    "TraceRecord",
    "ALPHA",
    "BETA",
    "GATE",
    "RelationEmbedding",
    "project_features",
    "message",
    "relation_aggregate",
    "gate_weights",
    "gate_combine",
    "cross_relation_aggregate",
    "stage",
    "RESIDUAL_SLOPE",
]
