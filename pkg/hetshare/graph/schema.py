from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Tuple


@dataclass(frozen=True)
class NodeType:
    """A node type of a heterogeneous graph.

    Attributes:
        type_id (int):
            Dense id, the position of the type in the schema.
        name (str):
            The type name, also used in file names (`nodes_<name>.jsonl`).
        feature_dim (int):
            Length of every feature row of this type.
        node_count (int):
            Number of nodes of this type.
    """

    type_id: int
    name: str
    feature_dim: int
    node_count: int


@dataclass(frozen=True)
class RelationSchema:
    """A directed edge type `src_type -> dst_type`.

    Undirected relations are declared as two mirrored relations.
    """

    edge_type_id: int
    name: str
    src_type: int
    dst_type: int
    edge_feature_dim: int = 0

    @property
    def has_edge_features(self) -> bool:
        return self.edge_feature_dim > 0


class TaskKind(Enum):
    SINGLE_LABEL = "single_label"
    MULTI_LABEL = "multi_label"


@dataclass(frozen=True)
class TaskSpec:
    """A node classification task over one target node type."""

    task_id: int
    name: str
    target_node_type: int
    kind: TaskKind
    num_classes: int

    @property
    def is_binary(self) -> bool:
        """True for single-label tasks with exactly two classes."""
        return self.kind is TaskKind.SINGLE_LABEL and self.num_classes == 2


@dataclass(frozen=True)
class GraphSchema:
    """The type-level description of a graph: what a model is built for.

    Node counts are not part of the schema; a model built for a schema runs on
    any graph (or sampled subgraph) with the same types, relations and tasks.
    """

    node_types: Tuple[Tuple[str, int], ...]
    relations: Tuple[RelationSchema, ...]
    tasks: Tuple[TaskSpec, ...]

    @classmethod
    def from_graph(cls, graph) -> "GraphSchema":
        return cls(
            tuple((t.name, t.feature_dim) for t in graph.node_types),
            tuple(graph.relations),
            tuple(graph.tasks),
        )

    def type_name(self, type_id: int) -> str:
        return self.node_types[type_id][0]

    def feature_dim(self, type_id: int) -> int:
        return self.node_types[type_id][1]

    def relations_into(self, type_id: int) -> List[RelationSchema]:
        return [r for r in self.relations if r.dst_type == type_id]

    def matches(self, graph) -> bool:
        return GraphSchema.from_graph(graph) == self

    def _serialize(self) -> Dict:
        return {
            "node_types": [{"name": n, "feature_dim": d} for n, d in self.node_types],
            "relations": [
                {
                    "name": r.name,
                    "src": r.src_type,
                    "dst": r.dst_type,
                    "edge_feature_dim": r.edge_feature_dim,
                }
                for r in self.relations
            ],
            "tasks": [
                {
                    "name": t.name,
                    "target_type": t.target_node_type,
                    "kind": t.kind.value,
                    "num_classes": t.num_classes,
                }
                for t in self.tasks
            ],
        }

    @classmethod
    def deserialize(cls, data: Dict) -> "GraphSchema":
        return cls(
            tuple((n["name"], int(n["feature_dim"])) for n in data["node_types"]),
            tuple(
                RelationSchema(i, r["name"], r["src"], r["dst"], r.get("edge_feature_dim", 0))
                for i, r in enumerate(data["relations"])
            ),
            tuple(
                TaskSpec(i, t["name"], t["target_type"], TaskKind(t["kind"]), t["num_classes"])
                for i, t in enumerate(data["tasks"])
            ),
        )
