from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields, replace
from json import JSONDecodeError, dumps, loads
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from ..evaluate import METRICS
from ..graph import HopBudgets
from ..model import ConfigError
from ..utils import ComplexEncoder

PRECISIONS = ("float32", "float64")


@dataclass
class TrainConfig:
    """Training protocol and hyperparameter grid.

    Attributes:
        max_epochs (int):
            Upper bound on the number of epochs.
        patience (int):
            Epochs without validation improvement before stopping.
        lr_grid (List[float]), wd_grid (List[float]):
            The learning rates and weight decays searched by `grid_search`.
        batch_targets (int):
            Targets drawn per task and epoch in sampled mode.
        pos_ratio (float):
            Fraction of positive targets in every sampled batch.
        hop_budgets (HopBudgets):
            Per node type, neighbors drawn per hop. None trains on the whole
            graph every epoch.
        eval_metric (str):
            The validation metric used for model selection.
        selection_task (int | str):
            The task position or name whose metric selects, or `mean`.
        split_ratios (Tuple[float, float, float]):
            Train, val and test fractions of every task's targets.
        precision (str):
            `float32` or `float64`.
        seed (int):
            Seed of the split and of the per-epoch sampling.
    """

    max_epochs: int = 200
    patience: int = 40
    lr_grid: List[float] = field(default_factory=lambda: [1e-2, 1e-3, 1e-4])
    wd_grid: List[float] = field(default_factory=lambda: [0.0, 1e-4, 1e-3])
    batch_targets: int = 256
    pos_ratio: float = 0.5
    hop_budgets: Optional[HopBudgets] = None
    eval_metric: str = "macro_f1"
    selection_task: Union[int, str] = "mean"
    split_ratios: Tuple[float, float, float] = (0.6, 0.2, 0.2)
    precision: str = "float32"
    seed: int = 0

    def __post_init__(self):
        self.lr_grid = [float(x) for x in self.lr_grid]
        self.wd_grid = [float(x) for x in self.wd_grid]
        self.split_ratios = tuple(float(r) for r in self.split_ratios)

    @property
    def sampled(self) -> bool:
        return self.hop_budgets is not None

    @property
    def dtype(self) -> np.dtype:
        return np.dtype(self.precision)

    def validate(self) -> TrainConfig:
        if self.max_epochs < 1:
            raise ConfigError("max_epochs", "must be at least 1")
        if self.patience < 1:
            raise ConfigError("patience", "must be at least 1")
        if not self.lr_grid:
            raise ConfigError("lr_grid", "must not be empty")
        if not self.wd_grid:
            raise ConfigError("wd_grid", "must not be empty")
        if any(lr <= 0 for lr in self.lr_grid):
            raise ConfigError("lr_grid", "learning rates must be positive")
        if any(wd < 0 for wd in self.wd_grid):
            raise ConfigError("wd_grid", "weight decays must be non-negative")
        if self.batch_targets < 1:
            raise ConfigError("batch_targets", "must be at least 1")
        if not 0 < self.pos_ratio < 1:
            raise ConfigError("pos_ratio", "must lie strictly between 0 and 1")
        if self.eval_metric not in METRICS:
            raise ConfigError("eval_metric", f"must be one of {', '.join(METRICS)}")
        if len(self.split_ratios) != 3 or any(r <= 0 for r in self.split_ratios):
            raise ConfigError("split_ratios", "needs three positive fractions")
        if self.precision not in PRECISIONS:
            raise ConfigError("precision", f"must be one of {', '.join(PRECISIONS)}")
        return self

    def with_changes(self, **changes) -> TrainConfig:
        return replace(self, **changes)

    def _serialize(self) -> Dict:
        data = asdict(self)
        data["split_ratios"] = list(self.split_ratios)
        return data

    def serialize(self, filepath: str = None) -> str:
        serial = dumps(self._serialize(), cls=ComplexEncoder, indent=2)
        if filepath is not None:
            with open(filepath, "w") as fp:
                fp.write(serial)
        return serial

    @classmethod
    def deserialize(cls, string: str) -> TrainConfig:
        try:
            data = loads(string)
        except JSONDecodeError as e:
            raise ConfigError("config", f"malformed JSON ({e.msg}, line {e.lineno})")
        if not isinstance(data, dict):
            raise ConfigError("train config", "must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(unknown[0], "unknown field")
        try:
            return cls(**data)
        except (TypeError, ValueError) as e:
            raise ConfigError("config", f"malformed field ({e})")

    @classmethod
    def from_file(cls, path) -> TrainConfig:
        try:
            with open(path) as fp:
                string = fp.read()
        except OSError as e:
            raise ConfigError("config", f"cannot read {path} ({e.strerror})")
        return cls.deserialize(string)


TRAIN_PRESETS: Dict[str, TrainConfig] = {
    "default": TrainConfig(),
    "sampled": TrainConfig(hop_budgets=[10, 5]),
    "smoke": TrainConfig(max_epochs=20, patience=5, lr_grid=[1e-2], wd_grid=[0.0]),
}


def train_preset(name: str, **changes) -> TrainConfig:
    if name not in TRAIN_PRESETS:
        raise ConfigError("preset", f"unknown train preset '{name}'")
    return TRAIN_PRESETS[name].with_changes(**changes)
