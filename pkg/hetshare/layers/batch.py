from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from ..autodiff import DiffValue, Partition, default_dtype
from ..graph import HeteroGraph, RelationSchema


@dataclass
class RelationIndex:
    """Index structures of one relation in a graph batch.

    Attributes:
        relation (RelationSchema):
            The relation.
        src (np.ndarray), dst (np.ndarray):
            Edge endpoints, local to the source and destination types.
        groups (Partition):
            Groups the edges by destination, over destinations with at least
            one incident edge only.
        present (np.ndarray):
            For every group, its destination node (ascending).
    """

    relation: RelationSchema
    src: np.ndarray
    dst: np.ndarray
    groups: Partition
    present: np.ndarray

    @property
    def empty(self) -> bool:
        return len(self.src) == 0


class GraphBatch:
    """A graph prepared for a forward pass: constant feature values and
    per-relation edge groupings at one precision."""

    def __init__(self, graph: HeteroGraph, dtype=None):
        dtype = np.dtype(dtype or default_dtype())
        self.graph = graph
        self.dtype = dtype
        self.node_features = [DiffValue(x, dtype=dtype) for x in graph.node_features]
        self.edge_features: List[Optional[DiffValue]] = [
            None if e.features is None else DiffValue(e.features, dtype=dtype)
            for e in graph.edges
        ]
        self.relations: List[RelationIndex] = []
        for relation, edges in zip(graph.relations, graph.edges):
            num_dst = graph.node_count(relation.dst_type)
            groups, present = Partition(edges.dst, num_dst).compact()
            self.relations.append(RelationIndex(relation, edges.src, edges.dst, groups, present))

    def __repr__(self):
        return f"GraphBatch({self.graph!r}, {self.dtype})"

    def node_count(self, type_id: int) -> int:
        return self.graph.node_count(type_id)

    def incoming(self, type_id: int) -> List[RelationIndex]:
        """Relations into a node type with at least one edge, by edge type id."""
        return [r for r in self.relations if r.relation.dst_type == type_id and not r.empty]
