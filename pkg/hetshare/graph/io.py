import json
import logging
import math
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from .exceptions import GraphLoadError, SchemaError
from .hetero_graph import EdgeSet, HeteroGraph, TaskTargets
from .schema import NodeType, RelationSchema, TaskKind, TaskSpec

logger = logging.getLogger(__name__)

SCHEMA_FILE = "schema.json"


def _nodes_file(name: str) -> str:
    return f"nodes_{name}.jsonl"


def _edges_file(name: str) -> str:
    return f"edges_{name}.jsonl"


def _labels_file(name: str) -> str:
    return f"labels_{name}.jsonl"


class _RecordReader:
    """Reads the JSONL records of one graph file.

    In strict mode every invariant violation raises a `SchemaError` naming the
    line; otherwise violations that the in-memory graph can still represent are
    kept so that `validate` can report them.
    """

    def __init__(self, path: Path, strict: bool):
        self.path = path
        self.strict = strict

    def records(self):
        try:
            with open(self.path) as fp:
                lines = fp.readlines()
        except OSError:
            raise GraphLoadError(self.path)
        for number, raw in enumerate(lines, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                record = json.loads(raw)
            except json.JSONDecodeError as e:
                raise SchemaError(self.path, f"malformed JSON ({e.msg})", number)
            if not isinstance(record, dict):
                raise SchemaError(self.path, "record is not a JSON object", number)
            yield number, record

    def fatal(self, reason: str, line: Optional[int] = None):
        raise SchemaError(self.path, reason, line)

    def violation(self, reason: str, line: Optional[int] = None):
        if self.strict:
            raise SchemaError(self.path, reason, line)
        logger.debug("Keeping violation in %s:%s: %s", self.path, line, reason)

    def field(self, record: dict, key: str, line: int):
        if key not in record:
            self.fatal(f"missing field '{key}'", line)
        return record[key]

    def row(self, values, dim: int, line: int, what: str) -> List[float]:
        if values is None:
            values = []
        if not isinstance(values, list):
            self.fatal(f"{what} must be a list of numbers", line)
        if len(values) != dim:
            self.fatal(f"{what} has length {len(values)}, expected {dim}", line)
        try:
            row = [float(v) for v in values]
        except (TypeError, ValueError):
            self.fatal(f"{what} contains a non-numeric value", line)
        if not all(math.isfinite(v) for v in row):
            self.violation(f"{what} contains a non-finite value", line)
        return row


def _is_index(value) -> bool:
    # JSON true/false decode to bool, a subclass of int
    return isinstance(value, int) and not isinstance(value, bool)


def _read_schema(root: Path) -> Tuple[List[dict], List[dict], List[dict]]:
    path = root / SCHEMA_FILE
    try:
        with open(path) as fp:
            schema = json.load(fp)
    except OSError:
        raise GraphLoadError(path)
    except json.JSONDecodeError as e:
        raise SchemaError(path, f"malformed JSON ({e.msg})", e.lineno)
    if not isinstance(schema, dict):
        raise SchemaError(path, "schema must be a JSON object")
    return (
        schema.get("node_types", []),
        schema.get("relations", []),
        schema.get("tasks", []),
    )


def _load_nodes(root: Path, name: str, dim: int, strict: bool) -> np.ndarray:
    reader = _RecordReader(root / _nodes_file(name), strict)
    rows: Dict[int, List[float]] = {}
    for line, record in reader.records():
        node_id = reader.field(record, "id", line)
        if not _is_index(node_id) or node_id < 0:
            reader.fatal(f"node id {node_id!r} is not a non-negative integer", line)
        if node_id in rows:
            reader.fatal(f"duplicate node id {node_id}", line)
        rows[node_id] = reader.row(record.get("x"), dim, line, "node features")
    count = len(rows)
    if count and max(rows) != count - 1:
        reader.fatal(f"node ids must be dense 0..{count - 1}")
    features = np.zeros((count, dim), dtype=np.float64)
    for node_id, row in rows.items():
        features[node_id] = row
    return features


def _load_edges(
    root: Path, relation: RelationSchema, counts: List[int], strict: bool
) -> EdgeSet:
    reader = _RecordReader(root / _edges_file(relation.name), strict)
    src, dst, features, lines = [], [], [], []
    for line, record in reader.records():
        s = reader.field(record, "src", line)
        d = reader.field(record, "dst", line)
        if not _is_index(s) or not _is_index(d):
            reader.fatal("edge endpoints must be integers", line)
        if not 0 <= s < counts[relation.src_type]:
            reader.violation(f"dangling source endpoint {s}", line)
        if not 0 <= d < counts[relation.dst_type]:
            reader.violation(f"dangling destination endpoint {d}", line)
        if relation.has_edge_features:
            features.append(
                reader.row(record.get("x"), relation.edge_feature_dim, line, "edge features")
            )
        elif record.get("x"):
            reader.fatal("edge features given for a featureless relation", line)
        src.append(s)
        dst.append(d)
        lines.append(line)

    seen: Dict[Tuple[int, int], int] = {}
    for s, d, line in zip(src, dst, lines):
        if (s, d) in seen:
            reader.violation(f"duplicate edge ({s}, {d}), first seen on line {seen[(s, d)]}", line)
        else:
            seen[(s, d)] = line

    edge_features = None
    if relation.has_edge_features:
        edge_features = np.asarray(features, dtype=np.float64).reshape(
            len(src), relation.edge_feature_dim
        )
    return EdgeSet(np.asarray(src), np.asarray(dst), edge_features).canonical()


def _load_labels(
    root: Path, task: TaskSpec, node_types: List[NodeType], strict: bool
) -> TaskTargets:
    reader = _RecordReader(root / _labels_file(task.name), strict)
    type_ids = {t.name: t.type_id for t in node_types}
    nodes, labels, types = [], [], []
    seen: Dict[Tuple[int, int], int] = {}
    for line, record in reader.records():
        node = reader.field(record, "node", line)
        y = reader.field(record, "y", line)
        if not _is_index(node):
            reader.fatal("label node must be an integer", line)
        type_name = record.get("type")
        if type_name is None:
            type_id = task.target_node_type
        elif type_name in type_ids:
            type_id = type_ids[type_name]
        else:
            reader.fatal(f"unknown node type '{type_name}'", line)
        if type_id != task.target_node_type:
            reader.violation(
                f"node of type '{node_types[type_id].name}' labeled for task '{task.name}'",
                line,
            )
        if not 0 <= node < node_types[type_id].node_count:
            reader.violation(f"dangling target node {node}", line)
        if (type_id, node) in seen:
            reader.fatal(f"node {node} labeled twice, first on line {seen[(type_id, node)]}", line)
        seen[(type_id, node)] = line

        if task.kind is TaskKind.MULTI_LABEL:
            if not isinstance(y, list) or not all(_is_index(c) for c in y):
                reader.fatal("multi-label y must be a list of class indices", line)
            row = np.zeros(task.num_classes, dtype=np.int64)
            for c in y:
                if not 0 <= c < task.num_classes:
                    reader.fatal(f"class {c} out of range [0, {task.num_classes})", line)
                row[c] = 1
            labels.append(row)
        else:
            if not _is_index(y):
                reader.fatal("single-label y must be an integer class index", line)
            if not 0 <= y < task.num_classes:
                reader.fatal(f"class {y} out of range [0, {task.num_classes})", line)
            labels.append(y)
        nodes.append(node)
        types.append(type_id)

    if task.kind is TaskKind.MULTI_LABEL:
        label_array = np.asarray(labels, dtype=np.int64).reshape(len(nodes), task.num_classes)
    else:
        label_array = np.asarray(labels, dtype=np.int64)
    return TaskTargets(np.asarray(nodes), label_array, np.asarray(types))


def load_graph(root_path: Union[str, Path], strict: bool = True) -> HeteroGraph:
    """Loads a heterogeneous graph from a graph directory.

    Args:
        root_path (str | Path):
            The directory holding `schema.json` and the JSONL node, edge and
            label files.
        strict (bool):
            Optional; When False, records that violate a graph invariant but
            can still be represented (dangling endpoints, duplicate edges,
            non-finite features, mistyped targets) are kept for `validate`.

    Returns:
        The loaded graph, edges sorted by (dst, src).

    Raises:
        GraphLoadError: A file is missing or unreadable.
        SchemaError: A record violates the schema; carries the file and line.
    """
    root = Path(root_path)
    schema_path = root / SCHEMA_FILE
    raw_types, raw_relations, raw_tasks = _read_schema(root)

    names = {}
    for i, entry in enumerate(raw_types):
        if "name" not in entry or "feature_dim" not in entry:
            raise SchemaError(schema_path, f"node type {i} needs 'name' and 'feature_dim'")
        if entry["name"] in names:
            raise SchemaError(schema_path, f"duplicate node type '{entry['name']}'")
        names[entry["name"]] = i

    node_features, node_types = [], []
    for i, entry in enumerate(raw_types):
        features = _load_nodes(root, entry["name"], int(entry["feature_dim"]), strict)
        node_features.append(features)
        node_types.append(NodeType(i, entry["name"], int(entry["feature_dim"]), len(features)))

    relations, edges = [], []
    counts = [t.node_count for t in node_types]
    for i, entry in enumerate(raw_relations):
        for key in ("name", "src", "dst"):
            if key not in entry:
                raise SchemaError(schema_path, f"relation {i} is missing '{key}'")
        for end in ("src", "dst"):
            if entry[end] not in names:
                raise SchemaError(
                    schema_path,
                    f"relation '{entry['name']}' references undeclared node type '{entry[end]}'",
                )
        relation = RelationSchema(
            i,
            entry["name"],
            names[entry["src"]],
            names[entry["dst"]],
            int(entry.get("edge_feature_dim", 0)),
        )
        relations.append(relation)
        edges.append(_load_edges(root, relation, counts, strict))

    tasks, targets = [], []
    for i, entry in enumerate(raw_tasks):
        name = entry.get("name", i)
        for key in ("name", "target_type", "kind", "num_classes"):
            if key not in entry:
                raise SchemaError(schema_path, f"task {i} is missing '{key}'")
        if entry["target_type"] not in names:
            raise SchemaError(
                schema_path, f"task '{name}' targets undeclared type '{entry['target_type']}'"
            )
        try:
            kind = TaskKind(entry["kind"])
        except ValueError:
            raise SchemaError(schema_path, f"task '{name}' has unknown kind '{entry['kind']}'")
        if int(entry["num_classes"]) < 2:
            raise SchemaError(schema_path, f"task '{name}' needs at least 2 classes")
        task = TaskSpec(
            i, entry["name"], names[entry["target_type"]], kind, int(entry["num_classes"])
        )
        tasks.append(task)
        targets.append(_load_labels(root, task, node_types, strict))

    graph = HeteroGraph(node_types, node_features, relations, edges, tasks, targets)
    logger.info("Loaded %r from %s", graph, root)
    return graph


def _number(value: float):
    return value if math.isfinite(value) else str(value)


def write_graph(graph: HeteroGraph, root_path: Union[str, Path]):
    """Writes a graph directory that `load_graph` reads back to the same graph.

    Args:
        graph (HeteroGraph):
            The graph to write. Edges are written in canonical order.
        root_path (str | Path):
            The target directory; created if missing.
    """
    root = Path(root_path)
    root.mkdir(parents=True, exist_ok=True)
    schema = {
        "node_types": [{"name": t.name, "feature_dim": t.feature_dim} for t in graph.node_types],
        "relations": [
            {
                "name": r.name,
                "src": graph.node_types[r.src_type].name,
                "dst": graph.node_types[r.dst_type].name,
                "edge_feature_dim": r.edge_feature_dim,
            }
            for r in graph.relations
        ],
        "tasks": [
            {
                "name": t.name,
                "target_type": graph.node_types[t.target_node_type].name,
                "kind": t.kind.value,
                "num_classes": t.num_classes,
            }
            for t in graph.tasks
        ],
    }
    with open(root / SCHEMA_FILE, "w") as fp:
        json.dump(schema, fp, indent=2)

    for node_type, features in zip(graph.node_types, graph.node_features):
        with open(root / _nodes_file(node_type.name), "w") as fp:
            for i, row in enumerate(features):
                x = [_number(float(v)) for v in row]
                fp.write(json.dumps({"id": i, "x": x}) + "\n")

    for relation, edge_set in zip(graph.relations, graph.edges):
        edge_set = edge_set.canonical()
        with open(root / _edges_file(relation.name), "w") as fp:
            for i in range(len(edge_set)):
                record = {"src": int(edge_set.src[i]), "dst": int(edge_set.dst[i])}
                if edge_set.features is not None:
                    record["x"] = [_number(float(v)) for v in edge_set.features[i]]
                fp.write(json.dumps(record) + "\n")

    for task, targets in zip(graph.tasks, graph.targets):
        with open(root / _labels_file(task.name), "w") as fp:
            for i in range(len(targets)):
                if task.kind is TaskKind.MULTI_LABEL:
                    y = [int(c) for c in np.flatnonzero(targets.labels[i])]
                else:
                    y = int(targets.labels[i])
                record = {"node": int(targets.nodes[i]), "y": y}
                type_id = int(targets.node_types[i])
                if type_id != task.target_node_type:
                    record["type"] = graph.node_types[type_id].name
                fp.write(json.dumps(record) + "\n")
    logger.info("Wrote %r to %s", graph, root)
