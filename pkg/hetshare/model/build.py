"""Parameter layouts of every variant.

A layout is the ordered mapping from parameter path to shape that a config
requires on a schema; `build_variant` initializes it and `check_parameters`
compares a loaded parameter set against it.
"""

from collections import OrderedDict
from typing import Dict, Tuple

from ..graph import GraphSchema, HeteroGraph
from ..layers import ParameterStore, param_path, stage
from .config import ModelConfig, Variant
from .exceptions import ParameterMismatch

Layout = Dict[str, Tuple[int, int]]

SHARED_OWNER = "task0"
SELECTOR_OWNER = "selector"


def task_owner(task_id: int) -> str:
    return f"task{task_id}"


def expert_owner(expert: int) -> str:
    return f"expert{expert}"


def _backbone(layout, owner: str, config: ModelConfig, schema: GraphSchema):
    d = config.hidden_dim
    for name, dim in schema.node_types:
        layout[param_path(owner, stage(0), "project_W", name)] = (dim, d)
        layout[param_path(owner, stage(0), "project_b", name)] = (1, d)
    for relation in schema.relations:
        if relation.has_edge_features:
            layout[param_path(owner, stage(0), "edge_W", relation.name)] = (
                relation.edge_feature_dim,
                d,
            )
            layout[param_path(owner, stage(0), "edge_b", relation.name)] = (1, d)
        else:
            layout[param_path(owner, stage(0), "edge_const", relation.name)] = (1, d)
    for layer in range(1, config.num_layers + 1):
        for relation in schema.relations:
            layout[param_path(owner, stage(layer), "message_W", relation.name)] = (d, d)
            layout[param_path(owner, stage(layer), "attn_W", relation.name)] = (3 * d, d)
            layout[param_path(owner, stage(layer), "attn_a", relation.name)] = (1, d)
        layout[param_path(owner, stage(layer), "agg_W", "all")] = (2 * d, d)
        layout[param_path(owner, stage(layer), "agg_b", "all")] = (1, d)


def _gate(layout, owner: str, stage_name: str, name: str, width: int, config: ModelConfig):
    layout[param_path(owner, stage_name, "gate_W", name)] = (config.hidden_dim, width)
    layout[param_path(owner, stage_name, "gate_b", name)] = (1, width)


def _head(layout, owner: str, config: ModelConfig, num_classes: int):
    d = config.hidden_dim
    for k in range(config.head_hidden_layers):
        layout[param_path(owner, "head", f"hidden{k}_W", "mlp")] = (d, d)
        layout[param_path(owner, "head", f"hidden{k}_b", "mlp")] = (1, d)
    layout[param_path(owner, "head", "out_W", "mlp")] = (d, num_classes)
    layout[param_path(owner, "head", "out_b", "mlp")] = (1, num_classes)


def parameter_layout(config: ModelConfig, schema: GraphSchema) -> Layout:
    """The paths and shapes of every parameter the config requires on the schema.

    Backbones are owned by `task{t}` (one per task, or `task0` alone for the
    single-backbone variants) or by `expert{k}`; every task owns its head
    under `task{t}/head`.
    """
    config.validate(schema)
    layout = OrderedDict()
    T = config.num_tasks
    variant = config.variant

    if variant.task_backbones:
        for t in range(T):
            _backbone(layout, task_owner(t), config, schema)
    elif variant is Variant.MOE_EXPERTS:
        for k in range(config.moe_num_experts):
            _backbone(layout, expert_owner(k), config, schema)
        for type_id in sorted({task.target_node_type for task in schema.tasks}):
            name, dim = schema.node_types[type_id]
            layout[param_path(SELECTOR_OWNER, stage(0), "project_W", name)] = (
                dim,
                config.hidden_dim,
            )
            layout[param_path(SELECTOR_OWNER, stage(0), "project_b", name)] = (
                1,
                config.hidden_dim,
            )
    else:
        _backbone(layout, SHARED_OWNER, config, schema)

    for t in range(T):
        owner = task_owner(t)
        if variant is Variant.SELECTIVE:
            for layer, on in enumerate(config.layer_share_mask, start=1):
                if on:
                    for relation in schema.relations:
                        _gate(layout, owner, stage(layer), relation.name, T, config)
        elif variant is Variant.ABLATION_NO_R:
            for layer, on in enumerate(config.layer_share_mask, start=1):
                if on:
                    _gate(layout, owner, stage(layer), "all", T, config)
        elif variant is Variant.ABLATION_NO_R_NO_L:
            _gate(layout, owner, "final", "all", T, config)
        elif variant is Variant.MOE_EXPERTS:
            _gate(layout, owner, "moe", "all", config.moe_num_experts, config)

    for task in schema.tasks:
        _head(layout, task_owner(task.task_id), config, task.num_classes)
    return layout


def build_variant(
    config: ModelConfig, schema: GraphSchema, seed: int = None, dtype=None
) -> ParameterStore:
    """Initializes the parameters of a variant.

    Args:
        config (ModelConfig):
            The validated model config.
        schema (GraphSchema):
            The types, relations and tasks the model is built for.
        seed (int):
            Optional; Overrides `config.seed`.
        dtype:
            Optional; The parameter precision. Defaults to the default dtype.

    Returns:
        A ParameterStore holding every parameter of `parameter_layout`, in
        layout order.
    """
    store = ParameterStore(config.seed if seed is None else seed, dtype)
    for path, shape in parameter_layout(config, schema).items():
        store.create(path, shape)
    return store


def check_parameters(config: ModelConfig, schema: GraphSchema, params: ParameterStore):
    """Raises ParameterMismatch unless `params` holds exactly the layout, at its shapes."""
    layout = parameter_layout(config, schema)
    missing = [p for p in layout if p not in params]
    unexpected = [p for p in params if p not in layout]
    if missing or unexpected:
        raise ParameterMismatch(missing, unexpected)
    misshapen = [p for p, shape in layout.items() if params[p].shape != tuple(shape)]
    if misshapen:
        raise ParameterMismatch(
            missing=misshapen,
            message=f"Parameters with unexpected shapes: {', '.join(misshapen)}.",
        )


def count_parameters(params: ParameterStore) -> int:
    return params.count()


def parameter_census(params: ParameterStore) -> Dict[str, int]:
    """Parameter groups per role family, e.g. `{"gate": 18, "head": 6, ...}`."""
    return params.census()


def complexity_estimate(config: ModelConfig, graph: HeteroGraph) -> Dict[str, float]:
    """Analytic per-forward cost of a variant on a graph.

    One backbone costs `L (n d^2 + |E| d)` and one gate `n T d`, with `n` the
    node count and `|E|` the edge count. Task backbones multiply the backbone
    cost by T; the selective variant adds `L (|T_E| / |T_V|) T` gate costs,
    one gate per relation at every layer spread over the node types.

    Returns:
        The backbone cost, the gate cost and the total of the variant.
    """
    n, edges = graph.num_nodes, graph.edge_count
    L, d, T = config.num_layers, config.hidden_dim, config.num_tasks
    hgnn = float(L * (n * d * d + edges * d))
    gate = float(n * T * d)
    variant = config.variant
    if variant in (Variant.STL, Variant.SHARED_BACKBONE):
        total = hgnn
    elif variant is Variant.MOE_EXPERTS:
        total = config.moe_num_experts * hgnn + T * gate
    elif variant is Variant.SELECTIVE:
        ratio = len(graph.relations) / max(len(graph.node_types), 1)
        total = T * hgnn + L * ratio * T * gate
    elif variant is Variant.ABLATION_NO_R:
        total = T * hgnn + L * T * gate
    else:
        total = T * hgnn + T * gate
    return {"hgnn": hgnn, "gate": gate, "total": total}
