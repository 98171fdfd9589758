import numpy as np
import pytest

from hetshare.graph import GraphSchema
from hetshare.model import (
    ParameterMismatch,
    Variant,
    build_variant,
    check_parameters,
    complexity_estimate,
    count_parameters,
    parameter_census,
    parameter_layout,
)
from tests.utils.generators import generate_test_graph, small_model_config

RELATIONS = 4


def _schema(num_tasks=2):
    return GraphSchema.from_graph(generate_test_graph(num_tasks=num_tasks))


def _census(variant, num_tasks=2, **changes):
    config = small_model_config(variant, num_tasks=num_tasks, **changes)
    return parameter_census(build_variant(config, _schema(num_tasks)))


@pytest.mark.parametrize(
    "variant, num_tasks, messages, gates",
    [
        (Variant.STL, 1, 2 * RELATIONS, 0),
        (Variant.SHARED_BACKBONE, 2, 2 * RELATIONS, 0),
        (Variant.SELECTIVE, 2, 2 * 2 * RELATIONS, 2 * 2 * RELATIONS),
        (Variant.ABLATION_NO_R, 2, 2 * 2 * RELATIONS, 2 * 2),
        (Variant.ABLATION_NO_R_NO_L, 2, 2 * 2 * RELATIONS, 2),
        (Variant.MOE_EXPERTS, 2, 3 * 2 * RELATIONS, 2),
    ],
)
def test_census_per_variant(variant, num_tasks, messages, gates):
    census = _census(variant, num_tasks)
    assert census["message"] == messages
    assert census.get("gate", 0) == gates
    assert census["head"] == num_tasks


def test_layer_mask_removes_gates_of_one_layer():
    both = _census(Variant.SELECTIVE, layer_share_mask=[True, True])
    first = _census(Variant.SELECTIVE, layer_share_mask=[True, False])
    assert both["gate"] - first["gate"] == RELATIONS * 2
    assert both["message"] == first["message"]


def test_layout_paths_and_shapes():
    layout = parameter_layout(small_model_config(), _schema())
    assert layout["task1/layer0/project_W/author"] == (3, 8)
    assert layout["task0/layer0/edge_const/cites"] == (1, 8)
    assert layout["task0/layer2/attn_W/writes"] == (24, 8)
    assert layout["task1/layer1/gate_W/published_in"] == (8, 2)
    assert layout["task0/head/hidden0_W/mlp"] == (8, 8)
    assert layout["task1/head/out_W/mlp"] == (8, 3)
    assert "task0/layer1/gate_W/all" not in layout


def test_edge_features_get_a_projection():
    graph = generate_test_graph(edge_features=True)
    layout = parameter_layout(small_model_config(), GraphSchema.from_graph(graph))
    assert layout["task0/layer0/edge_W/cites"] == (2, 8)
    assert "task0/layer0/edge_const/cites" not in layout


def test_moe_selector_projects_target_types_only():
    layout = parameter_layout(small_model_config(Variant.MOE_EXPERTS), _schema())
    selector = [p for p in layout if p.startswith("selector/")]
    assert selector == ["selector/layer0/project_W/paper", "selector/layer0/project_b/paper"]
    assert layout["task0/moe/gate_W/all"] == (8, 3)
    assert "expert2/layer2/agg_W/all" in layout


def test_build_is_deterministic_and_ordered():
    config = small_model_config()
    a = build_variant(config, _schema(), dtype=np.float64)
    b = build_variant(config, _schema(), dtype=np.float64)
    assert list(a) == list(parameter_layout(config, _schema()))
    for path in a:
        assert np.array_equal(a[path].data, b[path].data)
    other = build_variant(config, _schema(), seed=1, dtype=np.float64)
    assert not np.array_equal(
        a["task0/layer1/message_W/cites"].data, other["task0/layer1/message_W/cites"].data
    )


def test_shared_paths_agree_across_variants():
    schema = _schema()
    selective = build_variant(small_model_config(Variant.SELECTIVE), schema)
    ablation = build_variant(small_model_config(Variant.ABLATION_NO_R_NO_L), schema)
    for path in ablation:
        if path in selective:
            assert np.array_equal(selective[path].data, ablation[path].data)


def test_check_parameters():
    schema = _schema()
    config = small_model_config()
    store = build_variant(config, schema)
    check_parameters(config, schema, store)
    with pytest.raises(ParameterMismatch) as error:
        check_parameters(small_model_config(Variant.ABLATION_NO_R), schema, store)
    assert "task0/layer1/gate_W/all" in error.value.missing
    assert "task0/layer1/gate_W/cites" in error.value.unexpected

    store.put("task0/layer1/gate_W/cites", np.zeros((8, 5)))
    with pytest.raises(ParameterMismatch, match="unexpected shapes"):
        check_parameters(config, schema, store)


def test_count_parameters():
    config = small_model_config(Variant.STL, num_tasks=1)
    store = build_variant(config, _schema(1))
    assert count_parameters(store) == sum(
        rows * cols for rows, cols in parameter_layout(config, _schema(1)).values()
    )


def test_complexity_ordering():
    graph = generate_test_graph()
    cost = {
        variant: complexity_estimate(small_model_config(variant), graph)["total"]
        for variant in (
            Variant.SHARED_BACKBONE,
            Variant.SELECTIVE,
            Variant.ABLATION_NO_R,
            Variant.ABLATION_NO_R_NO_L,
        )
    }
    assert cost[Variant.SHARED_BACKBONE] < cost[Variant.ABLATION_NO_R_NO_L]
    assert cost[Variant.ABLATION_NO_R_NO_L] < cost[Variant.ABLATION_NO_R]
    assert cost[Variant.ABLATION_NO_R] < cost[Variant.SELECTIVE]
