from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from rich.table import Table

from .schema import NodeType, RelationSchema, TaskKind, TaskSpec


@dataclass
class EdgeSet:
    """The edges of one relation, in index form.

    Attributes:
        src (np.ndarray):
            Source node indices (local to the relation's source type).
        dst (np.ndarray):
            Destination node indices (local to the relation's destination type).
        features (np.ndarray | None):
            One feature row per edge, or None for featureless relations.
    """

    src: np.ndarray
    dst: np.ndarray
    features: Optional[np.ndarray] = None

    def __post_init__(self):
        self.src = np.asarray(self.src, dtype=np.int64).reshape(-1)
        self.dst = np.asarray(self.dst, dtype=np.int64).reshape(-1)
        if self.features is not None:
            self.features = np.asarray(self.features, dtype=np.float64)

    def __len__(self):
        return len(self.src)

    def subset(self, index: np.ndarray) -> EdgeSet:
        features = None if self.features is None else self.features[index]
        return EdgeSet(self.src[index], self.dst[index], features)

    def canonical(self) -> EdgeSet:
        """Returns the edges sorted by (dst, src)."""
        order = np.lexsort((self.src, self.dst))
        return self.subset(order)

    def is_canonical(self) -> bool:
        if len(self) < 2:
            return True
        key_dst, key_src = self.dst, self.src
        later = (key_dst[1:] > key_dst[:-1]) | (
            (key_dst[1:] == key_dst[:-1]) & (key_src[1:] >= key_src[:-1])
        )
        return bool(np.all(later))

    def offsets(self, num_dst: int) -> np.ndarray:
        """CSR offsets of the (canonically sorted) edges grouped by destination."""
        return np.searchsorted(self.dst, np.arange(num_dst + 1), side="left")


@dataclass
class TaskTargets:
    """Labeled target nodes of one task.

    Attributes:
        nodes (np.ndarray):
            Node indices, local to `node_types`.
        labels (np.ndarray):
            Class index per target (single-label) or a 0/1 indicator matrix
            with one column per class (multi-label).
        node_types (np.ndarray):
            The node type id of every referenced node.
    """

    nodes: np.ndarray
    labels: np.ndarray
    node_types: np.ndarray

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=np.int64).reshape(-1)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        self.node_types = np.asarray(self.node_types, dtype=np.int64).reshape(-1)

    def __len__(self):
        return len(self.nodes)

    @classmethod
    def empty(cls, task: TaskSpec) -> TaskTargets:
        if task.kind is TaskKind.MULTI_LABEL:
            labels = np.zeros((0, task.num_classes), dtype=np.int64)
        else:
            labels = np.zeros(0, dtype=np.int64)
        return cls(np.zeros(0, dtype=np.int64), labels, np.zeros(0, dtype=np.int64))

    def subset(self, index: np.ndarray) -> TaskTargets:
        index = np.asarray(index, dtype=np.int64)
        return TaskTargets(self.nodes[index], self.labels[index], self.node_types[index])

    def positives(self, task: TaskSpec) -> np.ndarray:
        """Boolean mask of positive targets.

        A single-label target is positive when its class is not 0; a
        multi-label target is positive when it carries at least one class.
        """
        if task.kind is TaskKind.MULTI_LABEL:
            return self.labels.reshape(len(self), -1).sum(axis=1) > 0
        return self.labels != 0


class HeteroGraph:
    """A heterogeneous graph with typed nodes, typed directed edges and per-task targets.

    The graph is treated as immutable once built: every transformation
    (`with_targets`, `select_tasks`, sampling) returns a new graph sharing
    unchanged arrays.

    Attributes:
        node_types (List[NodeType]):
            Node types, indexed by type id.
        node_features (List[np.ndarray]):
            One `node_count x feature_dim` matrix per node type.
        relations (List[RelationSchema]):
            Edge types, indexed by edge type id.
        edges (List[EdgeSet]):
            One edge set per relation, sorted by (dst, src).
        tasks (List[TaskSpec]):
            Tasks, indexed by task id.
        targets (List[TaskTargets]):
            One target set per task.
        origin (List[np.ndarray]):
            For every node type, the id each node had in the graph this one was
            sampled from (identity for loaded graphs).
    """

    def __init__(
        self,
        node_types: Sequence[NodeType],
        node_features: Sequence[np.ndarray],
        relations: Sequence[RelationSchema],
        edges: Sequence[EdgeSet],
        tasks: Sequence[TaskSpec] = (),
        targets: Optional[Sequence[TaskTargets]] = None,
        origin: Optional[Sequence[np.ndarray]] = None,
    ):
        self.node_types = list(node_types)
        self.node_features = [np.asarray(x, dtype=np.float64) for x in node_features]
        self.relations = list(relations)
        self.edges = list(edges)
        self.tasks = list(tasks)
        if targets is None:
            targets = [TaskTargets.empty(task) for task in self.tasks]
        self.targets = list(targets)
        if origin is None:
            origin = [np.arange(t.node_count, dtype=np.int64) for t in self.node_types]
        self.origin = [np.asarray(o, dtype=np.int64) for o in origin]

    def __repr__(self):
        return (
            f"HeteroGraph({len(self.node_types)} node types, {self.num_nodes} nodes, "
            f"{len(self.relations)} relations, {self.edge_count} edges, "
            f"{len(self.tasks)} tasks)"
        )

    @property
    def num_nodes(self) -> int:
        return sum(t.node_count for t in self.node_types)

    @property
    def edge_count(self) -> int:
        return sum(len(e) for e in self.edges)

    def node_count(self, type_id: int) -> int:
        return self.node_types[type_id].node_count

    def node_type(self, name: str) -> NodeType:
        for node_type in self.node_types:
            if node_type.name == name:
                return node_type
        raise KeyError(f"Unknown node type '{name}'.")

    def relation(self, name: str) -> RelationSchema:
        for relation in self.relations:
            if relation.name == name:
                return relation
        raise KeyError(f"Unknown relation '{name}'.")

    def task(self, name: str) -> TaskSpec:
        for task in self.tasks:
            if task.name == name:
                return task
        raise KeyError(f"Unknown task '{name}'.")

    def relations_into(self, type_id: int) -> List[RelationSchema]:
        """Relations whose destination is the given node type, by edge type id."""
        return [r for r in self.relations if r.dst_type == type_id]

    def _derive(self, **changes) -> HeteroGraph:
        fields = dict(
            node_types=self.node_types,
            node_features=self.node_features,
            relations=self.relations,
            edges=self.edges,
            tasks=self.tasks,
            targets=self.targets,
            origin=self.origin,
        )
        fields.update(changes)
        return HeteroGraph(**fields)

    def with_targets(self, targets: Sequence[TaskTargets]) -> HeteroGraph:
        """Returns the same graph structure holding other targets."""
        if len(targets) != len(self.tasks):
            raise ValueError(
                f"Expected {len(self.tasks)} target sets, got {len(targets)}."
            )
        return self._derive(targets=list(targets))

    def without_targets(self) -> HeteroGraph:
        return self._derive(targets=[TaskTargets.empty(t) for t in self.tasks])

    def select_tasks(self, task_ids: Sequence[int]) -> HeteroGraph:
        """Returns a view keeping only the given tasks, re-indexed densely."""
        tasks, targets = [], []
        for new_id, task_id in enumerate(task_ids):
            task = self.tasks[task_id]
            tasks.append(
                TaskSpec(new_id, task.name, task.target_node_type, task.kind, task.num_classes)
            )
            targets.append(self.targets[task_id])
        return self._derive(tasks=tasks, targets=targets)

    def canonical(self) -> HeteroGraph:
        """Returns the graph with every edge set sorted by (dst, src)."""
        return self._derive(edges=[e.canonical() for e in self.edges])

    def equals(self, other: HeteroGraph) -> bool:
        """Structural equality: schema, features, edges and targets."""
        if not isinstance(other, HeteroGraph):
            return False
        if (
            self.node_types != other.node_types
            or self.relations != other.relations
            or self.tasks != other.tasks
        ):
            return False
        for a, b in zip(self.node_features, other.node_features):
            if a.shape != b.shape or not np.array_equal(a, b):
                return False
        for a, b in zip(self.edges, other.edges):
            if not (np.array_equal(a.src, b.src) and np.array_equal(a.dst, b.dst)):
                return False
            if (a.features is None) != (b.features is None):
                return False
            if a.features is not None and not np.array_equal(a.features, b.features):
                return False
        for a, b in zip(self.targets, other.targets):
            if not (
                np.array_equal(a.nodes, b.nodes)
                and np.array_equal(a.labels, b.labels)
                and np.array_equal(a.node_types, b.node_types)
            ):
                return False
        return True

    def summary(self) -> Table:
        """A rich table describing node types, relations and tasks."""
        table = Table(title="HeteroGraph", box=None, show_edge=False)
        table.add_column("Kind", justify="right")
        table.add_column("Name")
        table.add_column("Details")
        for t in self.node_types:
            table.add_row("node type", t.name, f"{t.node_count} nodes, dim {t.feature_dim}")
        for r, e in zip(self.relations, self.edges):
            src = self.node_types[r.src_type].name
            dst = self.node_types[r.dst_type].name
            table.add_row(
                "relation", r.name, f"{src} -> {dst}, {len(e)} edges, edge dim {r.edge_feature_dim}"
            )
        for task, targets in zip(self.tasks, self.targets):
            table.add_row(
                "task",
                task.name,
                f"{task.kind.value}, {task.num_classes} classes, "
                f"{len(targets)} targets on {self.node_types[task.target_node_type].name}",
            )
        return table
