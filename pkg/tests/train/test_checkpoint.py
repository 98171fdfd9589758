import struct

import numpy as np
import pytest

from hetshare.graph import GraphSchema
from hetshare.model import Variant, build_variant
from hetshare.train import (
    CHECKPOINT_FILE,
    CheckpointError,
    CheckpointMismatch,
    TrainConfig,
    load_checkpoint,
    load_model,
    save_checkpoint,
    save_model,
)
from tests.utils.generators import generate_test_graph, small_model_config


def _model(dtype=np.float32, variant=Variant.SELECTIVE):
    schema = GraphSchema.from_graph(generate_test_graph())
    config = small_model_config(variant)
    store = build_variant(config, schema, seed=5, dtype=dtype)
    rng = np.random.default_rng(0)
    for path in store:
        store[path].data = rng.standard_normal(store[path].shape).astype(dtype)
    return config, schema, store


@pytest.mark.parametrize("dtype", [np.float32, np.float64])
def test_round_trip_is_bit_exact(tmp_path, dtype):
    config, schema, store = _model(dtype)
    path = save_checkpoint(store, tmp_path / CHECKPOINT_FILE)
    loaded = load_checkpoint(path, config, schema)
    assert loaded.dtype == np.dtype(dtype)
    assert list(loaded) == list(store)
    for name in store:
        assert np.array_equal(loaded[name].data, store[name].data)
        assert loaded[name].data.dtype == np.dtype(dtype)


def _corrupt(tmp_path, edit):
    _, _, store = _model()
    path = save_checkpoint(store, tmp_path / CHECKPOINT_FILE)
    raw = bytearray(path.read_bytes())
    path.write_bytes(bytes(edit(raw)))
    return path


@pytest.mark.parametrize(
    "edit, reason",
    [
        (lambda raw: b"NOPE" + raw[4:], "bad magic"),
        (lambda raw: raw[:4] + struct.pack("<H", 9) + raw[6:], "version 9"),
        (lambda raw: raw[:6] + b">" + raw[7:], "byte order"),
        (lambda raw: raw[:8], "truncated header"),
        (lambda raw: raw[:-8], "truncated parameter data"),
        (lambda raw: raw + b"\x00" * 3, "3 unexpected trailing bytes"),
        (lambda raw: raw[:11] + b"{" * 4 + raw[15:], "malformed header"),
    ],
)
def test_corrupted_checkpoints(tmp_path, edit, reason):
    path = _corrupt(tmp_path, edit)
    with pytest.raises(CheckpointError, match=reason):
        load_checkpoint(path)


def test_missing_checkpoint(tmp_path):
    with pytest.raises(CheckpointError, match="unreadable"):
        load_checkpoint(tmp_path / "absent.bin")


def test_checkpoint_must_match_the_model(tmp_path):
    config, schema, store = _model(variant=Variant.SELECTIVE)
    path = save_checkpoint(store, tmp_path / CHECKPOINT_FILE)
    other = small_model_config(Variant.ABLATION_NO_R)
    with pytest.raises(CheckpointMismatch) as error:
        load_checkpoint(path, other, schema)
    assert "task0/layer1/gate_W/all" in error.value.missing
    assert "task0/layer1/gate_W/cites" in error.value.unexpected
    wider = config.with_changes(hidden_dim=16)
    with pytest.raises(CheckpointMismatch):
        load_checkpoint(path, wider, schema)


def test_model_directory_round_trip(tmp_path):
    config, schema, store = _model(np.float64)
    train_config = TrainConfig(precision="float64", seed=3)
    save_model(tmp_path / "model", config, train_config, schema, store)
    loaded_config, loaded_train, loaded_schema, params = load_model(tmp_path / "model")
    assert loaded_config == config
    assert loaded_train == train_config
    assert loaded_schema == schema
    for name in store:
        assert np.array_equal(params[name].data, store[name].data)
