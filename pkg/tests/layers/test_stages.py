import numpy as np
import pytest

from hetshare.autodiff import DiffValue, Partition, grad_check, masked_softmax, reshape, row_sum
from hetshare.graph import GraphSchema
from hetshare.layers import (
    GraphBatch,
    RESIDUAL_SLOPE,
    cross_relation_aggregate,
    gate_combine,
    gate_weights,
    message,
    project_features,
    relation_aggregate,
)
from hetshare.model import Variant, build_variant
from tests.utils.generators import (
    generate_test_graph,
    loop_relation_attention,
    small_model_config,
)

OWNER = "task0"


def _setup(edge_features=False, heads=1):
    graph = generate_test_graph(num_tasks=1, edge_features=edge_features)
    config = small_model_config(Variant.STL, num_tasks=1, attention_heads=heads)
    store = build_variant(config, GraphSchema.from_graph(graph), seed=3, dtype=np.float64)
    batch = GraphBatch(graph, dtype=np.float64)
    return graph, store, batch


def _cites(graph, store, batch, layer=1, heads=1):
    h, h_edge = project_features(batch, store, OWNER)
    index = batch.relations[graph.relation("cites").edge_type_id]
    messages = message(h[0], store, OWNER, layer, "cites")
    embedding = relation_aggregate(
        index, h[0], h[0], messages, h_edge[index.relation.edge_type_id], store, OWNER, layer,
        heads=heads,
    )
    return h, h_edge, index, messages, embedding


@pytest.mark.parametrize("edge_features", [False, True])
def test_relation_attention_matches_loop_oracle(edge_features):
    graph, store, batch = _setup(edge_features)
    h, h_edge, index, messages, embedding = _cites(graph, store, batch)
    alpha, values = loop_relation_attention(
        h[0].data,
        h[0].data,
        h_edge[index.relation.edge_type_id].data,
        messages.data,
        index.src,
        index.dst,
        store["task0/layer1/attn_W/cites"].data,
        store["task0/layer1/attn_a/cites"].data,
    )
    assert list(index.present) == sorted(alpha)
    expected = np.concatenate([alpha[v] for v in sorted(alpha)])
    assert np.allclose(embedding.alpha.data[:, 0], expected)
    for row, center in enumerate(index.present):
        assert np.allclose(embedding.values.data[row], values[int(center)], atol=1e-10)


def test_alpha_groups_sum_to_one():
    graph, store, batch = _setup()
    *_, embedding = _cites(graph, store, batch)
    sums = np.zeros(len(embedding.present))
    np.add.at(sums, _groups(batch, graph), embedding.alpha.data[:, 0])
    assert np.allclose(sums, 1.0, atol=1e-6)
    assert (embedding.alpha.data > 0).all()


def _groups(batch, graph):
    return batch.relations[graph.relation("cites").edge_type_id].groups.segment_ids


def test_multi_head_attention_normalizes_every_head():
    graph, store, batch = _setup(heads=2)
    *_, embedding = _cites(graph, store, batch, heads=2)
    assert embedding.alpha.shape[1] == 2
    sums = np.zeros((len(embedding.present), 2))
    np.add.at(sums, _groups(batch, graph), embedding.alpha.data)
    assert np.allclose(sums, 1.0, atol=1e-6)


def test_attention_is_invariant_to_edge_storage_order():
    graph, store, batch = _setup()
    *_, embedding = _cites(graph, store, batch)

    cites = graph.relation("cites").edge_type_id
    order = np.random.default_rng(0).permutation(len(graph.edges[cites]))
    edges = list(graph.edges)
    edges[cites] = edges[cites].subset(order)
    shuffled = graph._derive(edges=edges)
    shuffled_batch = GraphBatch(shuffled, dtype=np.float64)
    *_, other = _cites(shuffled, store, shuffled_batch)
    assert np.array_equal(embedding.present, other.present)
    assert np.allclose(embedding.values.data, other.values.data, atol=1e-6)


def test_zero_initialized_gate_is_uniform():
    _, store, _ = _setup()
    store.create("task0/layer1/gate_W/cites", (8, 3))
    store.create("task0/layer1/gate_b/cites", (1, 3))
    selector = DiffValue(np.random.default_rng(1).standard_normal((5, 8)), dtype=np.float64)
    weights = gate_weights(selector, store, OWNER, "layer1", "cites", 3)
    assert weights.shape == (5, 3)
    assert np.allclose(weights.data, 1 / 3)


def test_gate_overrides():
    _, store, _ = _setup()
    selector = DiffValue(np.ones((2, 8)), dtype=np.float64)
    own = gate_weights(selector, store, OWNER, "layer1", "cites", 3, override="own", own_task=1)
    assert own.data.tolist() == [[0.0, 1.0, 0.0]] * 2
    uniform = gate_weights(selector, store, OWNER, "layer1", "cites", 4, override="uniform")
    assert np.allclose(uniform.data, 0.25)
    with pytest.raises(ValueError):
        gate_weights(selector, store, OWNER, "layer1", "cites", 3, override="other")


def test_gate_weights_lie_on_the_simplex():
    _, store, _ = _setup()
    rng = np.random.default_rng(5)
    rows = 0
    for draw in range(20):
        tasks = int(rng.integers(2, 6))
        name = f"draw{draw}"
        store.put(f"task0/layer2/gate_W/{name}", rng.normal(0, 3, (8, tasks)))
        store.put(f"task0/layer2/gate_b/{name}", rng.normal(0, 1, (1, tasks)))
        selector = DiffValue(rng.standard_normal((500, 8)), dtype=np.float64)
        weights = gate_weights(selector, store, OWNER, "layer2", name, tasks).data
        assert np.abs(weights.sum(axis=1) - 1.0).max() <= 1e-6
        assert (weights > 0).all()
        rows += len(weights)
    assert rows == 10_000


def test_attention_weights_lie_on_the_simplex():
    rng = np.random.default_rng(6)
    groups = 0
    for _ in range(20):
        ids = rng.integers(0, 600, size=1500)
        partition, present = Partition(ids, 600).compact()
        logits = DiffValue(rng.normal(0, 4, (len(ids), 1)), dtype=np.float64)
        alpha = masked_softmax(logits, partition).data[:, 0]
        sums = np.zeros(len(present))
        np.add.at(sums, partition.segment_ids, alpha)
        assert np.abs(sums - 1.0).max() <= 1e-6
        assert (alpha > 0).all()
        groups += len(present)
    assert groups >= 10_000


def test_gate_combine_is_a_row_mixture():
    a = DiffValue([[1.0, 2.0], [3.0, 4.0]], dtype=np.float64)
    b = DiffValue([[10.0, 20.0], [30.0, 40.0]], dtype=np.float64)
    weights = DiffValue([[1.0, 0.0], [0.25, 0.75]], dtype=np.float64)
    mixed = gate_combine(weights, [a, b])
    assert mixed.data.tolist() == [[1.0, 2.0], [23.25, 31.0]]


def test_single_task_gate_is_exact():
    a = DiffValue(np.random.default_rng(2).standard_normal((4, 3)), dtype=np.float64)
    weights = DiffValue(np.ones((4, 1)), dtype=np.float64)
    assert np.array_equal(gate_combine(weights, [a]).data, a.data)


def test_cross_relation_aggregate_without_relations():
    _, store, _ = _setup()
    h = DiffValue([[-1.0, 2.0]], dtype=np.float64)
    out, beta, centers = cross_relation_aggregate(h, [], store, OWNER, 1)
    assert out.data.tolist() == [[-RESIDUAL_SLOPE, 2.0]]
    assert beta is None and centers is None


def test_cross_relation_beta_per_node():
    graph, store, batch = _setup()
    h, h_edge = project_features(batch, store, OWNER)
    embeddings = []
    for name in ("writes", "cites", "published_in"):
        index = batch.relations[graph.relation(name).edge_type_id]
        src = h[index.relation.src_type]
        messages = message(src, store, OWNER, 1, name)
        embeddings.append(
            relation_aggregate(
                index, h[0], src, messages, h_edge[index.relation.edge_type_id], store, OWNER, 1
            )
        )
    out, beta, centers = cross_relation_aggregate(h[0], embeddings, store, OWNER, 1)
    assert out.shape == h[0].shape
    sums = np.zeros(graph.node_count(0))
    np.add.at(sums, centers, beta.data[:, 0])
    assert np.allclose(sums[np.unique(centers)], 1.0, atol=1e-6)
    assert (beta.data > 0).all()


def test_full_layer_gradients():
    graph, store, batch = _setup(edge_features=True)
    paths = [
        "task0/layer0/project_W/paper",
        "task0/layer0/edge_W/cites",
        "task0/layer1/message_W/cites",
        "task0/layer1/attn_W/cites",
        "task0/layer1/attn_a/cites",
        "task0/layer1/agg_W/all",
        "task0/layer1/agg_b/all",
    ]

    def f(*values):
        for path, value in zip(paths, values):
            store._params[path] = value
        h, h_edge = project_features(batch, store, OWNER)
        index = batch.relations[graph.relation("cites").edge_type_id]
        messages = message(h[0], store, OWNER, 1, "cites")
        embedding = relation_aggregate(
            index, h[0], h[0], messages, h_edge[index.relation.edge_type_id], store, OWNER, 1
        )
        out, _, _ = cross_relation_aggregate(h[0], [embedding], store, OWNER, 1)
        n, d = out.shape
        return row_sum(reshape(out, 1, n * d))

    inputs = [store[p].data.copy() for p in paths]
    assert grad_check(f, inputs, max_coords=12) < 1e-4


def test_relation_without_edges_gives_none():
    graph, store, _ = _setup()
    cites = graph.relation("cites").edge_type_id
    edges = list(graph.edges)
    edges[cites] = edges[cites].subset(np.zeros(0, dtype=np.int64))
    batch = GraphBatch(graph._derive(edges=edges), dtype=np.float64)
    h, h_edge = project_features(batch, store, OWNER)
    index = batch.relations[cites]
    assert index.empty
    assert [r.relation.name for r in batch.incoming(0)] == ["writes", "published_in"]
    result = relation_aggregate(
        index, h[0], h[0], message(h[0], store, OWNER, 1, "cites"), h_edge[cites], store, OWNER, 1
    )
    assert result is None
