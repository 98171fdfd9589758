"""The stages of one selective-sharing layer.

Every function is pure in (batch, parameters): it reads the parameters of one
backbone owner from a ParameterStore and returns new DiffValues.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..autodiff import (
    ContractViolation,
    DiffValue,
    Partition,
    ShapeError,
    add,
    concat_rows,
    gather_rows,
    leaky_relu,
    linear,
    masked_softmax,
    matmul,
    reshape,
    row_sum,
    scale_columns,
    scatter_rows,
    stack_rows,
    weighted_sum,
)
from .batch import GraphBatch, RelationIndex
from .params import ParameterStore, param_path

RESIDUAL_SLOPE = 0.01
LOGIT_SLOPE = 0.2


def stage(layer: int) -> str:
    return f"layer{layer}"


@dataclass
class RelationEmbedding:
    """Output of relation-wise aggregation for one relation.

    Attributes:
        present (np.ndarray):
            Destination nodes with at least one incident edge, ascending.
        values (DiffValue):
            One aggregated row per present node.
        alpha (DiffValue):
            Attention weight of every edge, `edges x heads`.
    """

    present: np.ndarray
    values: DiffValue
    alpha: Optional[DiffValue] = None


def project_features(
    batch: GraphBatch, store: ParameterStore, owner: str
) -> Tuple[List[DiffValue], List[DiffValue]]:
    """Maps node and edge features of every type to the hidden width.

    Node features use `h_v = x_v W + b` per node type; edge features of a
    featured relation likewise. Edges of a featureless relation all receive
    the relation's learned constant row.

    Returns:
        The per node type embeddings and the per relation edge embeddings.
    """
    graph = batch.graph
    nodes = []
    for node_type, x in zip(graph.node_types, batch.node_features):
        W = store[param_path(owner, stage(0), "project_W", node_type.name)]
        b = store[param_path(owner, stage(0), "project_b", node_type.name)]
        if x.shape[1] != W.shape[0]:
            raise ShapeError("project_features", x.shape, W.shape)
        nodes.append(linear(x, W, b))
    edges = []
    for relation, x in zip(graph.relations, batch.edge_features):
        if relation.has_edge_features:
            W = store[param_path(owner, stage(0), "edge_W", relation.name)]
            b = store[param_path(owner, stage(0), "edge_b", relation.name)]
            edges.append(linear(x, W, b))
        else:
            row = store[param_path(owner, stage(0), "edge_const", relation.name)]
            count = len(graph.edges[relation.edge_type_id])
            edges.append(gather_rows(row, np.zeros(count, dtype=np.int64)))
    return nodes, edges


def message(
    h_src: DiffValue, store: ParameterStore, owner: str, layer: int, relation_name: str
) -> DiffValue:
    """Transforms source node embeddings into messages, `h_u message_W`, one row per source node.

    Raises:
        ParameterStore.MissingParameter: No message weight for the relation.
    """
    W = store[param_path(owner, stage(layer), "message_W", relation_name)]
    return matmul(h_src, W)


def relation_aggregate(
    index: RelationIndex,
    h_dst: DiffValue,
    h_src: DiffValue,
    messages: DiffValue,
    h_edge: DiffValue,
    store: ParameterStore,
    owner: str,
    layer: int,
    heads: int = 1,
    leaky_logits: bool = False,
) -> Optional[RelationEmbedding]:
    """Attention-weighted aggregation of one relation's messages per central node.

    The logit of edge `(u, v)` is `attn_a . (attn_W [h_v || h_u || h_e])` with
    the raw neighbor embedding `h_u`; the weights are a softmax within each
    central node's incoming edges of the relation, and the result is the
    weighted sum of the messages `ĥ_u`. With several heads the hidden width is
    split into equal blocks, each with its own softmax.

    Returns:
        The aggregated embeddings of the central nodes with at least one edge
        of the relation, or None when the relation has no edge.
    """
    if index.empty:
        return None
    name = index.relation.name
    W = store[param_path(owner, stage(layer), "attn_W", name)]
    a = store[param_path(owner, stage(layer), "attn_a", name)]
    joint = concat_rows([gather_rows(h_dst, index.dst), gather_rows(h_src, index.src), h_edge])
    scored = scale_columns(matmul(joint, W), a)
    count, width = scored.shape
    if width % heads:
        raise ShapeError("relation_aggregate", scored.shape, (heads, width // heads))
    logits = reshape(row_sum(reshape(scored, count * heads, width // heads)), count, heads)
    if leaky_logits:
        logits = leaky_relu(logits, LOGIT_SLOPE)
    alpha = masked_softmax(logits, index.groups)
    values = weighted_sum(alpha, gather_rows(messages, index.src), index.groups)
    return RelationEmbedding(index.present, values, alpha)


def gate_weights(
    selector: DiffValue,
    store: ParameterStore,
    owner: str,
    stage_name: str,
    name: str,
    num_tasks: int,
    override: Optional[str] = None,
    own_task: int = 0,
) -> DiffValue:
    """Structure-aware gate: `softmax(FC(selector))` over the T tasks, one row per node.

    Args:
        selector (DiffValue):
            The gating task's own central embeddings, `n x d`.
        store (ParameterStore), owner (str), stage_name (str), name (str):
            Locate the gate's `gate_W` (`d x T`) and `gate_b` (`1 x T`).
        num_tasks (int):
            T, the number of mixed embeddings.
        override (str):
            Optional; `own` replaces the weights by the one-hot of `own_task`,
            `uniform` by 1/T. Used for diagnosis and ablation equivalences.
        own_task (int):
            Optional; The gating task's index among the T inputs.

    Returns:
        The `n x T` weights; every row lies on the simplex.
    """
    n = selector.shape[0]
    if override is not None:
        if override == "own":
            data = np.zeros((n, num_tasks), dtype=selector.data.dtype)
            data[:, own_task] = 1.0
        elif override == "uniform":
            data = np.full((n, num_tasks), 1.0 / num_tasks, dtype=selector.data.dtype)
        else:
            raise ValueError(f"Unknown gate override '{override}', expected 'own' or 'uniform'.")
        return DiffValue(data, dtype=selector.data.dtype)
    W = store[param_path(owner, stage_name, "gate_W", name)]
    b = store[param_path(owner, stage_name, "gate_b", name)]
    logits = reshape(linear(selector, W, b), n * num_tasks, 1)
    weights = masked_softmax(logits, Partition.blocks(n, num_tasks))
    return reshape(weights, n, num_tasks)


def gate_combine(weights: DiffValue, embeddings: Sequence[Optional[DiffValue]]) -> DiffValue:
    """Mixes the T tasks' embeddings row by row: `sum_j w_j h^j`.

    Raises:
        ContractViolation: An embedding is missing or the counts disagree.
    """
    if any(e is None for e in embeddings):
        raise ContractViolation("gate_combine", "every task's embedding must be present")
    n, tasks = weights.shape
    if len(embeddings) != tasks:
        raise ContractViolation("gate_combine", f"{tasks} weights for {len(embeddings)} embeddings")
    width = embeddings[0].shape[1]
    rows = reshape(concat_rows(list(embeddings)), n * tasks, width)
    return weighted_sum(reshape(weights, n * tasks, 1), rows, Partition.blocks(n, tasks))


def cross_relation_aggregate(
    h_prev: DiffValue,
    gated: Sequence[RelationEmbedding],
    store: ParameterStore,
    owner: str,
    layer: int,
) -> Tuple[DiffValue, Optional[DiffValue], Optional[np.ndarray]]:
    """Fuses a node type's relation embeddings, adds the residual and rectifies.

    Per central node, `beta = softmax_i(agg_b . (agg_W [h_v || h_i]))` over the
    relations present at that node; the output is
    `leaky_relu(sum_i beta_i h_i + h_v)`. A node without any present
    relation outputs `leaky_relu(h_v)`.

    Returns:
        The new embeddings, and the beta weights with their central nodes
        (None when no relation is present).
    """
    gated = [g for g in gated if g is not None and len(g.present)]
    if not gated:
        return leaky_relu(h_prev, RESIDUAL_SLOPE), None, None
    W = store[param_path(owner, stage(layer), "agg_W", "all")]
    b = store[param_path(owner, stage(layer), "agg_b", "all")]
    logits = []
    for g in gated:
        joint = concat_rows([gather_rows(h_prev, g.present), g.values])
        logits.append(row_sum(scale_columns(matmul(joint, W), b)))
    centers = np.concatenate([g.present for g in gated])
    groups, present = Partition(centers, h_prev.shape[0]).compact()
    beta = masked_softmax(stack_rows(logits), groups)
    fused = weighted_sum(beta, stack_rows([g.values for g in gated]), groups)
    out = add(scatter_rows(fused, present, h_prev.shape[0]), h_prev)
    return leaky_relu(out, RESIDUAL_SLOPE), beta, centers
