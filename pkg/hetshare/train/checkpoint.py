"""Binary parameter checkpoints and model directories.

A checkpoint file is laid out as

    magic     4 bytes  b"HSCK"
    version   2 bytes  unsigned, little-endian
    byteorder 1 byte   b"<"
    length    4 bytes  unsigned, little-endian; size of the header
    header    JSON     {"dtype": ..., "params": [{"path": ..., "shape": [r, c]}, ...]}
    data      float64, little-endian, row-major, parameters in header order

Values are widened to float64 on disk and narrowed back to the stored dtype
on load, which reproduces float32 and float64 parameters bit for bit.
"""

import json
import struct
from pathlib import Path
from typing import Optional, Tuple

import numpy as np

from ..graph import GraphSchema
from ..layers import ParameterStore
from ..model import ModelConfig, parameter_layout
from ..utils import ComplexEncoder
from .config import TrainConfig
from .exceptions import CheckpointError, CheckpointMismatch

MAGIC = b"HSCK"
VERSION = 1
BYTEORDER = b"<"
_PREFIX = struct.Struct("<4sHcI")

CHECKPOINT_FILE = "checkpoint.bin"
MODEL_CONFIG_FILE = "model_config.json"
TRAIN_CONFIG_FILE = "train_config.json"
SCHEMA_FILE = "graph_schema.json"


def save_checkpoint(params: ParameterStore, path) -> Path:
    path = Path(path)
    header = {
        "dtype": params.dtype.name,
        "params": [{"path": p, "shape": list(params[p].shape)} for p in params],
    }
    encoded = json.dumps(header).encode("utf-8")
    with open(path, "wb") as fp:
        fp.write(_PREFIX.pack(MAGIC, VERSION, BYTEORDER, len(encoded)))
        fp.write(encoded)
        for p in params:
            fp.write(np.ascontiguousarray(params[p].data, dtype="<f8").tobytes())
    return path


def load_checkpoint(
    path, config: Optional[ModelConfig] = None, schema: Optional[GraphSchema] = None
) -> ParameterStore:
    """Reads a checkpoint; with a config and schema, also checks it against the model.

    Raises:
        CheckpointError: Missing file, bad magic, unknown version or byte
            order, malformed header, or a truncated or oversized payload.
        CheckpointMismatch: The parameter paths or shapes differ from the
            layout the config requires.
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise CheckpointError(path, f"unreadable ({e.strerror})")
    if len(raw) < _PREFIX.size:
        raise CheckpointError(path, "truncated header")
    magic, version, byteorder, length = _PREFIX.unpack_from(raw)
    if magic != MAGIC:
        raise CheckpointError(path, "bad magic bytes")
    if version != VERSION:
        raise CheckpointError(path, f"version {version} is not supported (expected {VERSION})")
    if byteorder != BYTEORDER:
        raise CheckpointError(path, f"unsupported byte order {byteorder!r}")
    start = _PREFIX.size
    if len(raw) < start + length:
        raise CheckpointError(path, "truncated header")
    try:
        header = json.loads(raw[start : start + length].decode("utf-8"))
        entries = [(e["path"], tuple(int(s) for s in e["shape"])) for e in header["params"]]
        dtype = np.dtype(header["dtype"])
    except (ValueError, KeyError, TypeError):
        raise CheckpointError(path, "malformed header")

    offset = start + length
    expected = offset + 8 * sum(r * c for _, (r, c) in entries)
    if len(raw) < expected:
        raise CheckpointError(path, "truncated parameter data")
    if len(raw) > expected:
        raise CheckpointError(path, f"{len(raw) - expected} unexpected trailing bytes")

    params = ParameterStore(dtype=dtype)
    for name, (rows, cols) in entries:
        data = np.frombuffer(raw, dtype="<f8", count=rows * cols, offset=offset)
        params.put(name, data.reshape(rows, cols).astype(dtype))
        offset += 8 * rows * cols

    if config is not None and schema is not None:
        check_checkpoint(params, config, schema)
    return params


def check_checkpoint(params: ParameterStore, config: ModelConfig, schema: GraphSchema):
    layout = parameter_layout(config, schema)
    missing = [p for p in layout if p not in params]
    unexpected = [p for p in params if p not in layout]
    missing += [p for p, shape in layout.items() if p in params and params[p].shape != shape]
    if missing or unexpected:
        raise CheckpointMismatch(missing, unexpected)


def save_model(
    directory,
    config: ModelConfig,
    train_config: TrainConfig,
    schema: GraphSchema,
    params: ParameterStore,
) -> Path:
    """Writes everything `load_model` needs to rebuild a trained model."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    config.serialize(directory / MODEL_CONFIG_FILE)
    train_config.serialize(directory / TRAIN_CONFIG_FILE)
    with open(directory / SCHEMA_FILE, "w") as fp:
        json.dump(schema._serialize(), fp, cls=ComplexEncoder, indent=2)
    save_checkpoint(params, directory / CHECKPOINT_FILE)
    return directory


def load_model(directory) -> Tuple[ModelConfig, TrainConfig, GraphSchema, ParameterStore]:
    """Rebuilds a model saved by `save_model`.

    Raises:
        CheckpointError: The directory or one of its files is missing or unreadable.
        ConfigError: A saved config is malformed.
    """
    directory = Path(directory)
    for name in (MODEL_CONFIG_FILE, TRAIN_CONFIG_FILE, SCHEMA_FILE, CHECKPOINT_FILE):
        if not (directory / name).is_file():
            raise CheckpointError(directory, f"not a model directory (no {name})")
    config = ModelConfig.from_file(directory / MODEL_CONFIG_FILE)
    train_config = TrainConfig.from_file(directory / TRAIN_CONFIG_FILE)
    try:
        with open(directory / SCHEMA_FILE) as fp:
            schema = GraphSchema.deserialize(json.load(fp))
    except OSError as e:
        raise CheckpointError(directory / SCHEMA_FILE, f"unreadable ({e.strerror})")
    except (ValueError, KeyError, TypeError):
        raise CheckpointError(directory / SCHEMA_FILE, "malformed graph schema")
    params = load_checkpoint(directory / CHECKPOINT_FILE, config, schema)
    return config, train_config, schema, params
