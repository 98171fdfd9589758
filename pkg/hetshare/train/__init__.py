""".. include:: ../../docs/templates/train.md"""

from .config import TrainConfig, TRAIN_PRESETS, train_preset
from .early_stopping import EarlyStopping, reference_stop_epoch
from .trainer import Trainer, TrainResult, TrainState, train
from .grid import GridCell, GridResult, grid_search, select_cell
from .checkpoint import (
    save_checkpoint,
    load_checkpoint,
    check_checkpoint,
    save_model,
    load_model,
    CHECKPOINT_FILE,
    MODEL_CONFIG_FILE,
    TRAIN_CONFIG_FILE,
    SCHEMA_FILE,
)
from .exceptions import TrainingAborted, CheckpointError, CheckpointMismatch

__all__ = [
    "TrainConfig",
    "TRAIN_PRESETS",
    "train_preset",
    "EarlyStopping",
    "reference_stop_epoch",
    "Trainer",
    "TrainResult",
    "TrainState",
    "train",
    "GridCell",
    "GridResult",
    "grid_search",
    "select_cell",
    "save_checkpoint",
    "load_checkpoint",
    "check_checkpoint",
    "save_model",
    "load_model",
    "CHECKPOINT_FILE",
    "MODEL_CONFIG_FILE",
    "TRAIN_CONFIG_FILE",
    "SCHEMA_FILE",
    "TrainingAborted",
    "CheckpointError",
    "CheckpointMismatch",
]
