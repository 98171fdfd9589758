"""The forward pass of every variant and the multi-task loss."""

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Union

import numpy as np

from ..autodiff import (
    DiffValue,
    binary_cross_entropy,
    cross_entropy,
    gather_rows,
    linear,
    relu,
    sum_values,
)
from ..graph import GraphSchema, HeteroGraph, TaskKind, TaskSpec, TaskTargets
from ..layers import (
    ALPHA,
    BETA,
    GATE,
    AttentionTrace,
    GraphBatch,
    ParameterStore,
    RelationEmbedding,
    cross_relation_aggregate,
    gate_combine,
    gate_weights,
    message,
    param_path,
    project_features,
    relation_aggregate,
    stage,
)
from .build import SELECTOR_OWNER, SHARED_OWNER, check_parameters, expert_owner, task_owner
from .config import ModelConfig, Variant
from .exceptions import ConfigError, LabelKindMismatch

GATE_OVERRIDES = (None, "own", "uniform")


@dataclass
class ForwardResult:
    """Output of one forward pass.

    Attributes:
        logits (List[DiffValue | None]):
            Per task, one row of logits per target node of the batch; None
            when the batch holds no target of the task.
        trace (AttentionTrace | None):
            The recorded attention and gate weights, when a trace was requested.
    """

    logits: List[Optional[DiffValue]]
    trace: Optional[AttentionTrace] = None


class _Pass:
    """State of one forward pass over a batch."""

    def __init__(self, batch: GraphBatch, config: ModelConfig, params: ParameterStore, trace):
        self.batch = batch
        self.graph = batch.graph
        self.config = config
        self.params = params
        self.trace = trace

    def record(self, kind, owner_label, layer, relation, centers, weights, sources=None):
        if self.trace is not None:
            self.trace.add(kind, owner_label, layer, relation, centers, weights, sources)

    def record_gate(self, label: str, layer: int, relation: str, centers, weights: DiffValue):
        if self.trace is None:
            return
        n, width = weights.shape
        self.trace.add(
            GATE,
            label,
            layer,
            relation,
            np.repeat(np.asarray(centers), width),
            weights.data.reshape(-1),
            np.tile(np.arange(width), n),
        )

    def relation_embeddings(self, owner: str, label: str, h, h_edge, layer: int):
        """Messages and relation-wise attention of one backbone at one layer."""
        config = self.config
        out: List[Optional[RelationEmbedding]] = []
        for index in self.batch.relations:
            relation = index.relation
            if index.empty:
                out.append(None)
                continue
            messages = message(h[relation.src_type], self.params, owner, layer, relation.name)
            embedding = relation_aggregate(
                index,
                h[relation.dst_type],
                h[relation.src_type],
                messages,
                h_edge[relation.edge_type_id],
                self.params,
                owner,
                layer,
                heads=config.attention_heads,
                leaky_logits=config.leaky_attention,
            )
            self.record(
                ALPHA,
                label,
                layer,
                relation.name,
                index.dst,
                embedding.alpha.data.mean(axis=1),
                index.src,
            )
            out.append(embedding)
        return out

    def fuse(self, owner: str, label: str, h, embeddings, layer: int):
        """Cross-relation aggregation of every node type of one backbone."""
        fused = []
        for type_id, h_prev in enumerate(h):
            present = [
                (r.name, embeddings[r.edge_type_id])
                for r in self.graph.relations
                if r.dst_type == type_id and embeddings[r.edge_type_id] is not None
            ]
            names = [name for name, _ in present]
            incoming = [embedding for _, embedding in present]
            h_new, beta, centers = cross_relation_aggregate(
                h_prev, incoming, self.params, owner, layer
            )
            if beta is not None and self.trace is not None:
                start = 0
                for name, embedding in zip(names, incoming):
                    stop = start + len(embedding.present)
                    self.record(
                        BETA, label, layer, name, centers[start:stop], beta.data[start:stop]
                    )
                    start = stop
            fused.append(h_new)
        return fused

    def backbone(self, owner: str, label: str):
        """A backbone without any sharing: the final embeddings of every node type."""
        h, h_edge = project_features(self.batch, self.params, owner)
        for layer in range(1, self.config.num_layers + 1):
            embeddings = self.relation_embeddings(owner, label, h, h_edge, layer)
            h = self.fuse(owner, label, h, embeddings, layer)
        return h

    def task_backbones(self, override: Optional[str]):
        """T backbones with selective sharing between their layers.

        The selective variant gates every relation embedding where the layer
        mask is on; the ablation without relation-wise sharing gates the
        fused node embeddings of every layer instead.
        """
        config, graph = self.config, self.graph
        T = config.num_tasks
        owners = [task_owner(t) for t in range(T)]
        labels = [task.name for task in graph.tasks]
        projected = [project_features(self.batch, self.params, owner) for owner in owners]
        h = [p[0] for p in projected]
        h_edge = [p[1] for p in projected]
        for layer in range(1, config.num_layers + 1):
            shared = config.layer_share_mask[layer - 1]
            embeddings = [
                self.relation_embeddings(owners[t], labels[t], h[t], h_edge[t], layer)
                for t in range(T)
            ]
            if config.variant is Variant.SELECTIVE and shared:
                embeddings = [
                    self.gate_relations(t, labels[t], h[t], embeddings, layer, override)
                    for t in range(T)
                ]
            fused = [self.fuse(owners[t], labels[t], h[t], embeddings[t], layer) for t in range(T)]
            if config.variant is Variant.ABLATION_NO_R and shared:
                fused = [
                    self.gate_nodes(t, labels[t], h[t], fused, layer, override) for t in range(T)
                ]
            h = fused
        return h

    def gate_relations(self, t: int, label: str, h_prev, embeddings, layer: int, override):
        T = self.config.num_tasks
        gated: List[Optional[RelationEmbedding]] = []
        for index, own in zip(self.batch.relations, embeddings[t]):
            if own is None:
                gated.append(None)
                continue
            selector = gather_rows(h_prev[index.relation.dst_type], own.present)
            weights = gate_weights(
                selector,
                self.params,
                task_owner(t),
                stage(layer),
                index.relation.name,
                T,
                override=override,
                own_task=t,
            )
            self.record_gate(label, layer, index.relation.name, own.present, weights)
            others = [e[index.relation.edge_type_id].values for e in embeddings]
            mixed = gate_combine(weights, others)
            gated.append(RelationEmbedding(own.present, mixed, own.alpha))
        return gated

    def gate_nodes(self, t: int, label: str, h_prev, fused, layer: int, override):
        T = self.config.num_tasks
        out = []
        for type_id, selector in enumerate(h_prev):
            n = selector.shape[0]
            if n == 0:
                out.append(fused[t][type_id])
                continue
            weights = gate_weights(
                selector,
                self.params,
                task_owner(t),
                stage(layer),
                "all",
                T,
                override=override,
                own_task=t,
            )
            self.record_gate(label, layer, "*", np.arange(n), weights)
            out.append(gate_combine(weights, [f[type_id] for f in fused]))
        return out

    def head(self, t: int, embedding: DiffValue) -> DiffValue:
        owner = task_owner(t)
        h = embedding
        for k in range(self.config.head_hidden_layers):
            W = self.params[param_path(owner, "head", f"hidden{k}_W", "mlp")]
            b = self.params[param_path(owner, "head", f"hidden{k}_b", "mlp")]
            h = relu(linear(h, W, b))
        W = self.params[param_path(owner, "head", "out_W", "mlp")]
        b = self.params[param_path(owner, "head", "out_b", "mlp")]
        return linear(h, W, b)


def forward(
    graph: Union[HeteroGraph, GraphBatch],
    config: ModelConfig,
    params: ParameterStore,
    trace: Optional[AttentionTrace] = None,
    gate_override: Optional[str] = None,
) -> ForwardResult:
    """Runs a variant on a graph and returns per-task logits for its targets.

    Every backbone projects the typed features, then runs L layers of message
    passing, relation-wise attention and cross-relation aggregation. Where
    the variant shares, the tasks' embeddings are mixed by structure-aware
    gates: per relation (`selective`), per fused node embedding
    (`ablation_no_r`), on the final embeddings (`ablation_no_r_no_l`) or over
    expert backbones (`moe_experts`). Each task's head maps the final
    embedding of its target nodes to logits.

    Args:
        graph (HeteroGraph | GraphBatch):
            The graph (or a prepared batch) and its targets.
        config (ModelConfig):
            The model config the parameters were built for.
        params (ParameterStore):
            The parameters, as built by `build_variant`.
        trace (AttentionTrace):
            Optional; Filled with every alpha, beta and gate weight.
        gate_override (str):
            Optional; `own` forces every gate to the one-hot of its own task,
            `uniform` to equal weights.

    Returns:
        A ForwardResult.

    Raises:
        ConfigError: The config does not fit the graph, or an unknown override.
        ParameterMismatch: The parameters do not match the config.
    """
    batch = graph if isinstance(graph, GraphBatch) else GraphBatch(graph, dtype=params.dtype)
    graph = batch.graph
    schema = GraphSchema.from_graph(graph)
    config.validate(schema)
    check_parameters(config, schema, params)
    if gate_override not in GATE_OVERRIDES:
        raise ConfigError("gate_override", f"unknown override '{gate_override}'")
    if gate_override == "own" and config.variant is Variant.MOE_EXPERTS:
        raise ConfigError("gate_override", "'own' has no meaning for expert gates")

    state = _Pass(batch, config, params, trace)
    variant = config.variant
    T = config.num_tasks

    if variant.task_backbones:
        final = state.task_backbones(gate_override)
    elif variant is Variant.MOE_EXPERTS:
        final = None
        experts = [
            state.backbone(expert_owner(k), expert_owner(k))
            for k in range(config.moe_num_experts)
        ]
    else:
        label = graph.tasks[0].name if variant is Variant.STL else "shared"
        single = state.backbone(SHARED_OWNER, label)
        final = [single] * T

    logits: List[Optional[DiffValue]] = []
    for task, targets in zip(graph.tasks, graph.targets):
        t = task.task_id
        if len(targets) == 0:
            logits.append(None)
            continue
        type_id, nodes = task.target_node_type, targets.nodes
        if variant is Variant.MOE_EXPERTS:
            name = graph.node_types[type_id].name
            x = gather_rows(batch.node_features[type_id], nodes)
            selector = linear(
                x,
                params[param_path(SELECTOR_OWNER, stage(0), "project_W", name)],
                params[param_path(SELECTOR_OWNER, stage(0), "project_b", name)],
            )
            weights = gate_weights(
                selector,
                params,
                task_owner(t),
                "moe",
                "all",
                config.moe_num_experts,
                override=gate_override,
            )
            state.record_gate(task.name, 0, "*", nodes, weights)
            embedding = gate_combine(weights, [gather_rows(e[type_id], nodes) for e in experts])
        elif variant is Variant.ABLATION_NO_R_NO_L:
            own = gather_rows(final[t][type_id], nodes)
            weights = gate_weights(
                own, params, task_owner(t), "final", "all", T, override=gate_override, own_task=t
            )
            state.record_gate(task.name, 0, "*", nodes, weights)
            embedding = gate_combine(weights, [gather_rows(f[type_id], nodes) for f in final])
        else:
            embedding = gather_rows(final[t][type_id], nodes)
        logits.append(state.head(t, embedding))
    return ForwardResult(logits, trace)


def _check_labels(task: TaskSpec, targets: TaskTargets):
    labels = targets.labels
    if task.kind is TaskKind.MULTI_LABEL:
        if labels.ndim != 2 or labels.shape[1] != task.num_classes:
            raise LabelKindMismatch(task.name, f"a 0/1 matrix with {task.num_classes} columns")
    elif labels.ndim != 1:
        raise LabelKindMismatch(task.name, "one class index per target")


def loss(
    logits: Sequence[Optional[DiffValue]],
    targets: Sequence[TaskTargets],
    tasks: Sequence[TaskSpec],
    task_weights: Optional[Sequence[float]] = None,
) -> DiffValue:
    """The multi-task training loss: the (weighted) sum of the per-task losses.

    Single-label tasks use the mean cross entropy over their targets and
    multi-label tasks the mean binary cross entropy over all target and class
    entries. A task without targets in the batch contributes nothing.

    Raises:
        LabelKindMismatch: The labels of a task do not fit its kind.
    """
    if task_weights is None:
        task_weights = [1.0] * len(tasks)
    terms: List[DiffValue] = []
    weights: List[float] = []
    dtype = None
    for position, (task, task_logits, task_targets) in enumerate(zip(tasks, logits, targets)):
        _check_labels(task, task_targets)
        if task_logits is None or len(task_targets) == 0:
            continue
        dtype = task_logits.data.dtype
        if task.kind is TaskKind.MULTI_LABEL:
            terms.append(binary_cross_entropy(task_logits, task_targets.labels))
        else:
            terms.append(cross_entropy(task_logits, task_targets.labels))
        weights.append(task_weights[position])
    if not terms:
        return DiffValue(np.zeros((1, 1)), dtype=dtype)
    return sum_values(terms, weights)


def task_losses(
    logits: Sequence[Optional[DiffValue]], targets: Sequence[TaskTargets], tasks: Sequence[TaskSpec]
) -> Dict[str, float]:
    """Per task loss values, for logging; tasks without targets are left out."""
    values = {}
    for task, task_logits, task_targets in zip(tasks, logits, targets):
        if task_logits is None or len(task_targets) == 0:
            continue
        values[task.name] = loss([task_logits], [task_targets], [task], [1.0]).item()
    return values
