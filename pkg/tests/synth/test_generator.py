import json

import numpy as np
import pytest

from hetshare.graph import load_graph, validate
from hetshare.model import ConfigError
from hetshare.synth import (
    GROUND_TRUTH_FILE,
    RELATIONS,
    InvalidSignalPlan,
    SynthConfig,
    generate,
    synth_preset,
    write_synthetic,
)


def _config(**changes):
    fields = dict(num_targets=200, neighbors_per_relation=3, feature_dim=4, seed=1)
    fields.update(changes)
    return SynthConfig(**fields)


def test_generation_is_deterministic():
    a, truth_a = generate(_config())
    b, truth_b = generate(_config())
    assert a.equals(b)
    assert truth_a.thresholds == truth_b.thresholds
    assert not a.equals(generate(_config(seed=2))[0])


def test_graph_layout():
    graph, truth = generate(_config())
    assert [t.name for t in graph.node_types] == ["T", "A", "B", "C"]
    assert [r.name for r in graph.relations] == list(RELATIONS)
    assert [t.name for t in graph.tasks] == ["task1", "task2"]
    for relation, edges in zip(graph.relations, graph.edges):
        assert graph.node_types[relation.src_type].name == RELATIONS[relation.name]
        assert np.bincount(edges.dst, minlength=200).tolist() == [3] * 200
    assert validate(graph).clean
    for direction in truth.directions.values():
        assert np.linalg.norm(direction) == pytest.approx(1.0)


def test_noise_free_labels_follow_the_threshold():
    graph, truth = generate(_config(noise_std=0.0, positive_rate=[0.5, 0.1]))
    plan = _config().signal_plan
    for t, targets in enumerate(graph.targets):
        clean = sum(w * truth.projections[r] for r, w in plan[t].items())
        assert np.array_equal(targets.labels, (clean > truth.thresholds[t]).astype(int))
    assert int(graph.targets[0].labels.sum()) == 100
    assert int(graph.targets[1].labels.sum()) == 20


def test_label_fraction():
    graph, _ = generate(_config(label_fraction=[1.0, 0.3]))
    assert [len(t) for t in graph.targets] == [200, 60]
    assert np.all(np.diff(graph.targets[1].nodes) > 0)


@pytest.mark.parametrize(
    "plan, reason",
    [
        ([{"r_other": 1.0}], "unknown relation 'r_other'"),
        ([{}], "no relation"),
        ([{"r_shared": 1.5, "r_task1": -0.5}], "non-negative"),
        ([{"r_shared": 0.5}], "sum to 0.5"),
    ],
)
def test_invalid_signal_plans(plan, reason):
    with pytest.raises(InvalidSignalPlan, match=reason) as error:
        generate(_config(signal_plan=plan))
    assert error.value.task == 0


@pytest.mark.parametrize(
    "changes, field",
    [
        (dict(num_targets=2), "num_targets"),
        (dict(neighbors_per_relation=0), "neighbors_per_relation"),
        (dict(pool_size=2), "pool_size"),
        (dict(noise_std=-1.0), "noise_std"),
        (dict(positive_rate=[0.5]), "positive_rate"),
        (dict(label_fraction=[1.0, 0.0]), "label_fraction"),
    ],
)
def test_invalid_fields(changes, field):
    with pytest.raises(ConfigError) as error:
        _config(**changes).validate()
    assert error.value.field == field


def test_presets():
    assert synth_preset("very_sparse").positive_rate == [0.002, 0.002]
    assert synth_preset("single_task").num_tasks == 1
    smaller = synth_preset("sparse", num_targets=50)
    assert smaller.pool_size == 50
    with pytest.raises(ConfigError):
        synth_preset("dense")


def test_write_synthetic(tmp_path):
    config = _config()
    graph, truth = generate(config)
    root = write_synthetic(graph, truth, tmp_path / "synthetic")
    assert load_graph(root).equals(graph)
    written = json.loads((root / GROUND_TRUTH_FILE).read_text())
    assert written["thresholds"] == pytest.approx(truth.thresholds)
    assert written["signal_plan"] == config.signal_plan
    assert SynthConfig(**written["config"]) == config


def test_config_round_trip(tmp_path):
    config = _config(signal_plan=[{"r_task2": 1.0}])
    path = tmp_path / "synth.json"
    config.serialize(str(path))
    assert SynthConfig.from_file(path) == config
