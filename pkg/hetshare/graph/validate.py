from dataclasses import dataclass, field
from typing import List

import numpy as np
from rich.console import Console
from rich.table import Table

from .hetero_graph import HeteroGraph
from .schema import TaskKind


@dataclass(frozen=True)
class Finding:
    """One invariant violation.

    Attributes:
        kind (str):
            A stable identifier, e.g. `duplicate-edge` or `task-type`.
        location (str):
            Where the violation is, e.g. `relation 'cites' edge 4`.
        message (str):
            A human-readable description.
    """

    kind: str
    location: str
    message: str

    def __str__(self):
        return f"[{self.kind}] {self.location}: {self.message}"


@dataclass
class ValidationReport:
    findings: List[Finding] = field(default_factory=list)

    def __len__(self):
        return len(self.findings)

    def __iter__(self):
        return iter(self.findings)

    def __bool__(self):
        return True

    @property
    def clean(self) -> bool:
        return not self.findings

    def add(self, kind: str, location: str, message: str):
        self.findings.append(Finding(kind, location, message))

    def of_kind(self, kind: str) -> List[Finding]:
        return [f for f in self.findings if f.kind == kind]

    def print(self, console: Console = None):
        console = console or Console()
        if self.clean:
            console.print("[green]No findings.")
            return
        table = Table(title="Validation findings")
        table.add_column("Kind")
        table.add_column("Location")
        table.add_column("Message")
        for finding in self.findings:
            table.add_row(finding.kind, finding.location, finding.message)
        console.print(table)


def _check_schema(graph: HeteroGraph, report: ValidationReport):
    for i, node_type in enumerate(graph.node_types):
        if node_type.type_id != i:
            report.add(
                "type-ids",
                f"node type '{node_type.name}'",
                f"type id {node_type.type_id} at position {i}",
            )
    declared = len(graph.node_types)
    for i, relation in enumerate(graph.relations):
        where = f"relation '{relation.name}'"
        if relation.edge_type_id != i:
            report.add(
                "relation-ids", where, f"edge type id {relation.edge_type_id} at position {i}"
            )
        for end, type_id in (("source", relation.src_type), ("destination", relation.dst_type)):
            if not 0 <= type_id < declared:
                report.add("relation-type", where, f"{end} type {type_id} is not declared")
    for i, task in enumerate(graph.tasks):
        where = f"task '{task.name}'"
        if task.task_id != i:
            report.add("task-ids", where, f"task id {task.task_id} at position {i}")
        if not 0 <= task.target_node_type < declared:
            report.add(
                "task-target-type", where, f"target type {task.target_node_type} is not declared"
            )
        if task.num_classes < 2:
            report.add("task-classes", where, f"{task.num_classes} classes, at least 2 required")


def _check_features(graph: HeteroGraph, report: ValidationReport):
    for node_type, features in zip(graph.node_types, graph.node_features):
        where = f"node type '{node_type.name}'"
        if features.shape != (node_type.node_count, node_type.feature_dim):
            report.add(
                "feature-dim",
                where,
                f"feature matrix has shape {features.shape}, "
                f"expected {(node_type.node_count, node_type.feature_dim)}",
            )
        for row in np.flatnonzero(~np.isfinite(features).all(axis=1)):
            report.add(
                "non-finite-feature", f"{where} node {row}", "feature row has a non-finite value"
            )


def _check_edges(graph: HeteroGraph, report: ValidationReport):
    declared = len(graph.node_types)
    for relation, edges in zip(graph.relations, graph.edges):
        where = f"relation '{relation.name}'"
        if not (0 <= relation.src_type < declared and 0 <= relation.dst_type < declared):
            continue
        src_count = graph.node_count(relation.src_type)
        dst_count = graph.node_count(relation.dst_type)
        for i in np.flatnonzero((edges.src < 0) | (edges.src >= src_count)):
            report.add(
                "dangling-endpoint",
                f"{where} edge {i}",
                f"source {edges.src[i]} out of range [0, {src_count})",
            )
        for i in np.flatnonzero((edges.dst < 0) | (edges.dst >= dst_count)):
            report.add(
                "dangling-endpoint",
                f"{where} edge {i}",
                f"destination {edges.dst[i]} out of range [0, {dst_count})",
            )
        if not edges.is_canonical():
            report.add("unsorted-edges", where, "edges are not sorted by (dst, src)")
        canonical = edges.canonical()
        repeated = (canonical.src[1:] == canonical.src[:-1]) & (
            canonical.dst[1:] == canonical.dst[:-1]
        )
        for i in np.flatnonzero(repeated):
            report.add(
                "duplicate-edge",
                where,
                f"edge ({canonical.src[i + 1]}, {canonical.dst[i + 1]}) appears more than once",
            )
        if relation.has_edge_features:
            expected = (len(edges), relation.edge_feature_dim)
            if edges.features is None or edges.features.shape != expected:
                report.add(
                    "feature-dim", where, "edge feature matrix does not match edge_feature_dim"
                )
            else:
                for i in np.flatnonzero(~np.isfinite(edges.features).all(axis=1)):
                    report.add(
                        "non-finite-feature",
                        f"{where} edge {i}",
                        "edge feature row has a non-finite value",
                    )
        elif edges.features is not None and edges.features.size:
            report.add("feature-dim", where, "featureless relation carries edge features")


def _check_targets(graph: HeteroGraph, report: ValidationReport):
    for task, targets in zip(graph.tasks, graph.targets):
        where = f"task '{task.name}'"
        for i in range(len(targets)):
            node, type_id = int(targets.nodes[i]), int(targets.node_types[i])
            if type_id != task.target_node_type:
                known = 0 <= type_id < len(graph.node_types)
                name = graph.node_types[type_id].name if known else type_id
                report.add("task-type", f"{where} target {i}", f"node {node} has type '{name}'")
                continue
            if not 0 <= node < graph.node_count(type_id):
                report.add("dangling-target", f"{where} target {i}", f"node {node} does not exist")
        labels = targets.labels
        if task.kind is TaskKind.MULTI_LABEL:
            bad = (
                labels.ndim != 2
                or labels.shape[1] != task.num_classes
                or not np.isin(labels, (0, 1)).all()
            )
        else:
            bad = labels.ndim != 1 or bool(((labels < 0) | (labels >= task.num_classes)).any())
        if bad:
            report.add("label-range", where, "labels do not fit the task's kind and class count")


def validate(graph: HeteroGraph) -> ValidationReport:
    """Lists every invariant violation of a graph.

    The report is empty exactly when the graph satisfies all invariants:
    dense ids, declared types, in-range endpoints, canonically sorted and
    duplicate-free edges, finite features of the declared width, and targets of
    the task's target type.

    Args:
        graph (HeteroGraph):
            The graph to check; typically loaded with `strict=False`.

    Returns:
        A ValidationReport of findings.
    """
    report = ValidationReport()
    _check_schema(graph, report)
    _check_features(graph, report)
    _check_edges(graph, report)
    _check_targets(graph, report)
    return report
