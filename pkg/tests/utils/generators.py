from pathlib import Path
from typing import Dict, List, Sequence, Tuple

import numpy as np

from hetshare.graph import (
    EdgeSet,
    HeteroGraph,
    NodeType,
    RelationSchema,
    TaskKind,
    TaskSpec,
    TaskTargets,
)
from hetshare.model import ModelConfig, Variant
from hetshare.train import TrainConfig

TESTING_FILES = Path(__file__).parent.parent / "graph_testing_files"


def graph_dir(name: str) -> Path:
    """A fixture graph directory: `clean`, `duplicate_edge` or `missing_schema`."""
    return (TESTING_FILES / name).resolve()


def generate_test_graph(
    num_tasks: int = 2,
    papers: int = 12,
    authors: int = 5,
    edge_features: bool = False,
    multi_label: bool = False,
    seed: int = 0,
) -> HeteroGraph:
    """
    Generates a small bibliographic graph for testing.

    Node types `paper` (dim 4), `author` (dim 3) and `venue` (dim 2); relations
    `writes` (author -> paper), `cites` (paper -> paper), `published_in`
    (venue -> paper) and `written_by` (paper -> author). Every paper has an
    author and a venue. Tasks, all over every paper:

    - `topic`: two classes, alternating;
    - `field`: three classes (or, with `multi_label`, a 3-class indicator);
    - `rank`: two classes in pairs.

    Arguments
    ---------
    num_tasks : int
        How many of the tasks above to keep, in order (1 to 3).
    edge_features : bool
        Whether `cites` carries 2-dimensional edge features.
    """
    rng = np.random.default_rng(seed)
    venues = 3
    node_types = [
        NodeType(0, "paper", 4, papers),
        NodeType(1, "author", 3, authors),
        NodeType(2, "venue", 2, venues),
    ]
    features = [rng.standard_normal((t.node_count, t.feature_dim)) for t in node_types]

    writes_src = np.arange(papers) % authors
    writes_dst = np.arange(papers)
    extra = rng.choice(papers, size=papers // 2, replace=False)
    extra_src = (extra + 1) % authors
    writes = EdgeSet(
        np.concatenate([writes_src, extra_src]), np.concatenate([writes_dst, extra])
    ).canonical()

    pairs = set()
    for paper in range(papers):
        for cited in rng.choice(papers, size=2, replace=False):
            if cited != paper:
                pairs.add((int(cited), paper))
    cites_src, cites_dst = zip(*sorted(pairs))
    cite_features = rng.standard_normal((len(pairs), 2)) if edge_features else None
    cites = EdgeSet(cites_src, cites_dst, cite_features).canonical()

    published = EdgeSet(np.arange(papers) % venues, np.arange(papers)).canonical()
    written_by = EdgeSet(writes.dst, writes.src).canonical()

    relations = [
        RelationSchema(0, "writes", 1, 0),
        RelationSchema(1, "cites", 0, 0, 2 if edge_features else 0),
        RelationSchema(2, "published_in", 2, 0),
        RelationSchema(3, "written_by", 0, 1),
    ]
    edges = [writes, cites, published, written_by]

    nodes = np.arange(papers)
    types = np.zeros(papers, dtype=np.int64)
    if multi_label:
        field_labels = np.zeros((papers, 3), dtype=np.int64)
        field_labels[nodes, nodes % 3] = 1
        field_labels[nodes % 4 == 0, 2] = 1
        field = TaskSpec(1, "field", 0, TaskKind.MULTI_LABEL, 3)
    else:
        field_labels = nodes % 3
        field = TaskSpec(1, "field", 0, TaskKind.SINGLE_LABEL, 3)
    all_tasks = [
        (TaskSpec(0, "topic", 0, TaskKind.SINGLE_LABEL, 2), nodes % 2),
        (field, field_labels),
        (TaskSpec(2, "rank", 0, TaskKind.SINGLE_LABEL, 2), (nodes // 2) % 2),
    ]
    tasks = [spec for spec, _ in all_tasks[:num_tasks]]
    targets = [TaskTargets(nodes, labels, types) for _, labels in all_tasks[:num_tasks]]
    return HeteroGraph(node_types, features, relations, edges, tasks, targets)


def small_model_config(variant=Variant.SELECTIVE, num_tasks: int = 2, **changes) -> ModelConfig:
    """A narrow, shallow model that keeps tests fast."""
    fields = dict(
        num_layers=2, hidden_dim=8, num_tasks=num_tasks, variant=variant, head_hidden_layers=1
    )
    fields.update(changes)
    return ModelConfig(**fields)


def small_train_config(**changes) -> TrainConfig:
    fields = dict(max_epochs=3, patience=2, lr_grid=[1e-2], wd_grid=[0.0], precision="float64")
    fields.update(changes)
    return TrainConfig(**fields)


def loop_relation_attention(
    h_dst: np.ndarray,
    h_src: np.ndarray,
    h_edge: np.ndarray,
    messages: np.ndarray,
    src: Sequence[int],
    dst: Sequence[int],
    W: np.ndarray,
    a: np.ndarray,
) -> Tuple[Dict[int, List[float]], Dict[int, np.ndarray]]:
    """
    Single-head relation attention computed node by node.

    Returns
    -------
    alpha : Dict[int, List[float]]
        Per central node, the weights of its incoming edges in edge order.
    values : Dict[int, np.ndarray]
        Per central node, the weighted sum of its neighbors' messages.
    """
    alpha, values = {}, {}
    for center in sorted(set(int(v) for v in dst)):
        edges = [i for i, v in enumerate(dst) if v == center]
        logits = []
        for i in edges:
            joint = np.concatenate([h_dst[center], h_src[src[i]], h_edge[i]])
            logits.append(float(np.dot(joint @ W, a.reshape(-1))))
        peak = max(logits)
        exp = [np.exp(x - peak) for x in logits]
        weights = [e / sum(exp) for e in exp]
        alpha[center] = weights
        values[center] = sum(w * messages[src[i]] for w, i in zip(weights, edges))
    return alpha, values


def six_node_graph() -> HeteroGraph:
    """
    Four papers and two authors, `writes` (author -> paper) and featured
    `cites` (paper -> paper), with a 2-class and a 3-class task over papers.

    Paper 3 is cited by nobody and authors receive no edge at all, so both
    the single-relation and the relation-free residual paths are exercised.
    """
    rng = np.random.default_rng(6)
    node_types = [NodeType(0, "paper", 3, 4), NodeType(1, "author", 2, 2)]
    features = [rng.standard_normal((4, 3)), rng.standard_normal((2, 2))]
    relations = [RelationSchema(0, "writes", 1, 0), RelationSchema(1, "cites", 0, 0, 2)]
    writes = EdgeSet([0, 1, 0, 1, 1], [0, 0, 1, 2, 3]).canonical()
    cites = EdgeSet([1, 2, 3, 0, 3], [0, 0, 1, 2, 2], rng.standard_normal((5, 2))).canonical()
    tasks = [
        TaskSpec(0, "topic", 0, TaskKind.SINGLE_LABEL, 2),
        TaskSpec(1, "field", 0, TaskKind.SINGLE_LABEL, 3),
    ]
    types = np.zeros(4, dtype=np.int64)
    targets = [
        TaskTargets(np.arange(4), np.array([0, 1, 0, 1]), types),
        TaskTargets(np.array([0, 2, 3]), np.array([2, 0, 1]), types[:3]),
    ]
    return HeteroGraph(node_types, features, relations, [writes, cites], tasks, targets)


def randomize_parameters(store, seed: int = 0, scale: float = 0.5):
    """Overwrites every parameter with Gaussian noise, gates included."""
    rng = np.random.default_rng(seed)
    for path in list(store):
        store.put(path, scale * rng.standard_normal(store[path].shape))


def _softmax(logits: Sequence[float]) -> List[float]:
    peak = max(logits)
    exp = [np.exp(x - peak) for x in logits]
    return [e / sum(exp) for e in exp]


def _leaky(x: np.ndarray, slope: float) -> np.ndarray:
    return np.where(x > 0, x, slope * x)


def loop_forward(graph: HeteroGraph, config: ModelConfig, params) -> List[np.ndarray]:
    """
    Single-head forward pass written node by node.

    Covers the task-owned backbones with per-relation gates (`selective`) or
    per-node-type gates (`ablation_no_r`) and the single-backbone variants
    (`shared_backbone`, `stl`). Attention reads the raw neighbor embedding,
    cross-relation fusion adds the residual and rectifies with slope 0.01.

    Returns
    -------
    logits : List[np.ndarray]
        Per task, one row per target node.
    """
    T = config.num_tasks
    variant = config.variant
    owners = [f"task{t}" for t in range(T)] if variant.task_backbones else ["task0"] * T
    backbones = list(dict.fromkeys(owners))

    def param(owner, stage, role, name):
        return params[f"{owner}/{stage}/{role}/{name}"].data.astype(np.float64)

    h, h_edge = {}, {}
    for owner in backbones:
        h[owner] = []
        for t, xs in zip(graph.node_types, graph.node_features):
            W = param(owner, "layer0", "project_W", t.name)
            b = param(owner, "layer0", "project_b", t.name)[0]
            h[owner].append([x @ W + b for x in xs])
        h_edge[owner] = []
        for relation, edges in zip(graph.relations, graph.edges):
            if relation.has_edge_features:
                W = param(owner, "layer0", "edge_W", relation.name)
                b = param(owner, "layer0", "edge_b", relation.name)[0]
                h_edge[owner].append([f @ W + b for f in edges.features])
            else:
                row = param(owner, "layer0", "edge_const", relation.name)[0]
                h_edge[owner].append([row] * len(edges))

    for layer in range(1, config.num_layers + 1):
        stage = f"layer{layer}"
        shared = config.layer_share_mask[layer - 1]
        values = {}
        for owner in backbones:
            values[owner] = []
            for relation, edges in zip(graph.relations, graph.edges):
                W_m = param(owner, stage, "message_W", relation.name)
                W_a = param(owner, stage, "attn_W", relation.name)
                a = param(owner, stage, "attn_a", relation.name)[0]
                per_center = {}
                for center in sorted(set(edges.dst.tolist())):
                    incoming = [i for i, v in enumerate(edges.dst) if v == center]
                    logits = []
                    for i in incoming:
                        joint = np.concatenate(
                            [
                                h[owner][relation.dst_type][center],
                                h[owner][relation.src_type][edges.src[i]],
                                h_edge[owner][relation.edge_type_id][i],
                            ]
                        )
                        logits.append(float(np.dot(joint @ W_a, a)))
                    weights = _softmax(logits)
                    messages = [h[owner][relation.src_type][edges.src[i]] @ W_m for i in incoming]
                    per_center[center] = sum(w * m for w, m in zip(weights, messages))
                values[owner].append(per_center)

        if variant is Variant.SELECTIVE and shared:
            gated = {}
            for t, owner in enumerate(owners):
                gated[owner] = []
                for relation in graph.relations:
                    W = param(owner, stage, "gate_W", relation.name)
                    b = param(owner, stage, "gate_b", relation.name)[0]
                    mixed = {}
                    for center in values[owner][relation.edge_type_id]:
                        selector = h[owner][relation.dst_type][center]
                        weights = _softmax(list(selector @ W + b))
                        mixed[center] = sum(
                            w * values[other][relation.edge_type_id][center]
                            for w, other in zip(weights, owners)
                        )
                    gated[owner].append(mixed)
            values = gated

        fused = {}
        for owner in backbones:
            W = param(owner, stage, "agg_W", "all")
            b = param(owner, stage, "agg_b", "all")[0]
            fused[owner] = []
            for node_type in graph.node_types:
                rows = []
                for v, h_v in enumerate(h[owner][node_type.type_id]):
                    pieces = [
                        values[owner][r.edge_type_id][v]
                        for r in graph.relations
                        if r.dst_type == node_type.type_id and v in values[owner][r.edge_type_id]
                    ]
                    total = h_v
                    if pieces:
                        logits = [
                            float(np.dot(np.concatenate([h_v, piece]) @ W, b)) for piece in pieces
                        ]
                        beta = _softmax(logits)
                        total = sum(w * piece for w, piece in zip(beta, pieces)) + h_v
                    rows.append(_leaky(total, 0.01))
                fused[owner].append(rows)

        if variant is Variant.ABLATION_NO_R and shared:
            mixed = {}
            for owner in owners:
                W = param(owner, stage, "gate_W", "all")
                b = param(owner, stage, "gate_b", "all")[0]
                mixed[owner] = [
                    [
                        sum(
                            w * fused[other][type_id][v]
                            for w, other in zip(_softmax(list(h_v @ W + b)), owners)
                        )
                        for v, h_v in enumerate(h[owner][type_id])
                    ]
                    for type_id in range(len(graph.node_types))
                ]
            fused = mixed
        h = fused

    logits = []
    for t, (task, targets) in enumerate(zip(graph.tasks, graph.targets)):
        head = f"task{t}"
        rows = []
        for v in targets.nodes:
            z = h[owners[t]][task.target_node_type][v]
            for k in range(config.head_hidden_layers):
                z = np.maximum(
                    z @ param(head, "head", f"hidden{k}_W", "mlp")
                    + param(head, "head", f"hidden{k}_b", "mlp")[0],
                    0.0,
                )
            W = param(head, "head", "out_W", "mlp")
            rows.append(z @ W + param(head, "head", "out_b", "mlp")[0])
        logits.append(np.array(rows))
    return logits


def loop_auc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """Fraction of (positive, negative) pairs ordered correctly, ties counting half."""
    positives = [s for s, y in zip(scores, labels) if y]
    negatives = [s for s, y in zip(scores, labels) if not y]
    wins = 0.0
    for p in positives:
        for n in negatives:
            wins += 1.0 if p > n else 0.5 if p == n else 0.0
    return wins / (len(positives) * len(negatives))


def loop_average_precision(scores: Sequence[float], labels: Sequence[int]) -> float:
    """Average precision by sweeping every distinct score as a threshold, highest first."""
    scores, labels = np.asarray(scores, dtype=np.float64), np.asarray(labels).astype(bool)
    positives = labels.sum()
    total, previous_recall = 0.0, 0.0
    for threshold in np.unique(scores)[::-1]:
        chosen = labels[scores >= threshold]
        hits = chosen.sum()
        recall = hits / positives
        total += (recall - previous_recall) * (hits / len(chosen))
        previous_recall = recall
    return float(total)


def without_timing(log: List[Dict]) -> List[Dict]:
    """Epoch records minus their wall-clock field."""
    return [{k: v for k, v in record.items() if k != "seconds"} for record in log]
