import json

import numpy as np
import pytest

from hetshare.graph import SplitAssignment, SplitError, split_targets
from hetshare.model import Variant
from hetshare.train import (
    GridCell,
    Trainer,
    TrainingAborted,
    grid_search,
    reference_stop_epoch,
    select_cell,
    train,
)
from tests.utils.generators import (
    generate_test_graph,
    small_model_config,
    small_train_config,
    without_timing,
)


def _setup(variant=Variant.SELECTIVE, **train_changes):
    graph = generate_test_graph(papers=20)
    return (
        graph,
        split_targets(graph, seed=0),
        small_model_config(variant),
        small_train_config(**train_changes),
    )


def _scripted(scores, snapshots=None):
    def scorer(trainer, epoch):
        if snapshots is not None:
            snapshots[epoch] = trainer.params.snapshot()
        return scores[epoch - 1]

    return scorer


@pytest.mark.parametrize(
    "scores, patience",
    [
        ([0.1, 0.3, 0.2, 0.2, 0.2, 0.9], 3),
        ([0.5, 0.5, 0.5, 0.5], 2),
        ([0.1, 0.2, 0.3, 0.4, 0.5, 0.6], 2),
    ],
)
def test_early_stopping_follows_the_rule(scores, patience):
    graph, split, model_config, train_config = _setup(max_epochs=6, patience=patience)
    snapshots = {}
    result = train(graph, split, model_config, train_config, scorer=_scripted(scores, snapshots))
    stop, best = reference_stop_epoch(scores, patience, 6)
    assert (result.stop_epoch, result.best_epoch) == (stop, best)
    assert len(result.log) == stop
    assert result.best_score == scores[best - 1]
    for path, value in snapshots[best].items():
        assert np.array_equal(result.params[path].data, value)


def test_training_is_deterministic():
    graph, split, model_config, train_config = _setup()
    a = train(graph, split, model_config, train_config)
    b = train(graph, split, model_config, train_config)
    assert without_timing(a.log) == without_timing(b.log)
    for path in a.params:
        assert np.array_equal(a.params[path].data, b.params[path].data)


def test_sampled_training_is_deterministic():
    graph, split, model_config, train_config = _setup(
        Variant.SHARED_BACKBONE, hop_budgets=[2, 1], batch_targets=4
    )
    a = train(graph, split, model_config, train_config)
    b = train(graph, split, model_config, train_config)
    assert without_timing(a.log) == without_timing(b.log)
    trainer = Trainer(graph, split, model_config, train_config)
    assert len(list(trainer.batches(1))) == 2
    assert trainer.epoch_seed(1) != trainer.epoch_seed(2)


def test_training_lowers_the_loss():
    graph, split, model_config, train_config = _setup(max_epochs=8, patience=8)
    result = train(graph, split, model_config, train_config, scorer=_scripted([0.0] * 8))
    losses = [record["train_loss"] for record in result.log]
    assert losses[-1] < losses[0]


def test_log_file(tmp_path):
    graph, split, model_config, train_config = _setup()
    path = tmp_path / "train.jsonl"
    result = train(graph, split, model_config, train_config, log_path=path)
    records = [json.loads(line) for line in path.read_text().splitlines()]
    assert [r["epoch"] for r in records] == [r["epoch"] for r in result.log]
    assert {"train_loss", "val_score", "val", "lr", "wd", "seconds"} <= set(records[0])
    assert [t["task"] for t in records[0]["val"]] == ["topic", "field"]


def test_non_finite_loss_aborts():
    graph, split, model_config, train_config = _setup()
    features = [x.copy() for x in graph.node_features]
    features[0][0, 0] = np.nan
    broken = graph._derive(node_features=features)
    with pytest.raises(TrainingAborted) as error:
        train(broken, split, model_config, train_config)
    assert error.value.epoch == 1


def test_missing_validation_targets():
    graph, split, model_config, train_config = _setup()
    codes = [np.zeros_like(c) for c in split.codes]
    with pytest.raises(SplitError, match="validation"):
        Trainer(graph, SplitAssignment(codes), model_config, train_config)


def test_select_cell_breaks_ties_by_smaller_rates():
    cells = [
        GridCell(1e-2, 0.0, 0.8, 3, 5),
        GridCell(1e-3, 1e-4, 0.8, 4, 6),
        GridCell(1e-3, 0.0, 0.8, 2, 4),
        GridCell(1e-4, 0.0, 0.7, 1, 3),
    ]
    assert select_cell(cells) == 2


def test_grid_search(tmp_path):
    graph, split, model_config, train_config = _setup(lr_grid=[1e-2, 1e-3], wd_grid=[0.0])
    result = grid_search(graph, split, model_config, train_config, log_dir=tmp_path, workers=2)
    assert [(c.learning_rate, c.weight_decay) for c in result.cells] == [(1e-2, 0.0), (1e-3, 0.0)]
    chosen = result.cells[select_cell(result.cells)]
    assert result.learning_rate == chosen.learning_rate
    assert result.best.best_score == chosen.score
    assert sorted(p.name for p in tmp_path.iterdir()) == [
        "train_lr0.001_wd0.jsonl",
        "train_lr0.01_wd0.jsonl",
    ]
    assert result.table().row_count == 2
