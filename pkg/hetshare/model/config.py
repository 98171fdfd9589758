from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields, replace
from enum import Enum
from json import JSONDecodeError, dumps, loads
from typing import Dict, List, Optional

from ..graph import GraphSchema
from ..utils import ComplexEncoder
from .exceptions import ConfigError

# Alternative spellings of variant values.
VARIANT_ALIASES = {"struchis": "selective"}


class Variant(Enum):
    """Model variants.

    `SELECTIVE` gates every (task, relation, layer); `ABLATION_NO_R` gates the
    aggregated node embeddings once per (task, layer); `ABLATION_NO_R_NO_L`
    gates the final embeddings only.
    """

    SELECTIVE = "selective"
    STL = "stl"
    SHARED_BACKBONE = "shared_backbone"
    MOE_EXPERTS = "moe_experts"
    ABLATION_NO_R = "ablation_no_r"
    ABLATION_NO_R_NO_L = "ablation_no_r_no_l"

    @classmethod
    def parse(cls, value) -> Variant:
        if isinstance(value, Variant):
            return value
        if isinstance(value, str) and value in VARIANT_ALIASES:
            return cls(VARIANT_ALIASES[value])
        try:
            return cls(value)
        except ValueError:
            names = ", ".join(v.value for v in cls)
            raise ConfigError("variant", f"unknown variant '{value}' (expected one of {names})")

    @property
    def task_backbones(self) -> bool:
        """Whether every task owns a backbone."""
        return self in (Variant.SELECTIVE, Variant.ABLATION_NO_R, Variant.ABLATION_NO_R_NO_L)


@dataclass
class ModelConfig:
    """Architecture and sharing switches.

    Attributes:
        num_layers (int):
            L, the number of message-passing layers.
        hidden_dim (int):
            d, the width of every embedding.
        num_tasks (int):
            T.
        variant (Variant):
            Which model to build.
        layer_share_mask (List[bool]):
            Per layer, whether selective sharing is applied. Defaults to all on.
        moe_num_experts (int):
            Number of experts of the `moe_experts` variant. Defaults to T + 1.
        head_hidden_layers (int):
            Hidden fully-connected stages of every prediction head.
        attention_heads (int):
            Heads of the relation-wise attention; must divide `hidden_dim`.
        leaky_attention (bool):
            Rectify attention logits with a leaky ReLU before the softmax.
        task_weights (List[float]):
            Per-task loss weights. Defaults to 1.0 each.
        seed (int):
            Seed of the parameter initialization.
    """

    num_layers: int = 3
    hidden_dim: int = 64
    num_tasks: int = 1
    variant: Variant = Variant.SELECTIVE
    layer_share_mask: Optional[List[bool]] = None
    moe_num_experts: Optional[int] = None
    head_hidden_layers: int = 2
    attention_heads: int = 1
    leaky_attention: bool = False
    task_weights: Optional[List[float]] = None
    seed: int = 0

    def __post_init__(self):
        self.variant = Variant.parse(self.variant)
        if self.layer_share_mask is None:
            self.layer_share_mask = [True] * self.num_layers
        else:
            self.layer_share_mask = [bool(m) for m in self.layer_share_mask]
        if self.moe_num_experts is None:
            self.moe_num_experts = self.num_tasks + 1
        if self.task_weights is None:
            self.task_weights = [1.0] * self.num_tasks
        else:
            self.task_weights = [float(w) for w in self.task_weights]

    def validate(self, schema: GraphSchema = None) -> ModelConfig:
        """Checks the invariants of the config, and its fit to a graph schema.

        Raises:
            ConfigError: Names the first invalid field.
        """
        for name in ("num_layers", "hidden_dim", "num_tasks", "attention_heads"):
            if not isinstance(getattr(self, name), int) or getattr(self, name) < 1:
                raise ConfigError(name, f"must be a positive integer, got {getattr(self, name)!r}")
        if self.head_hidden_layers < 0:
            raise ConfigError("head_hidden_layers", "must be non-negative")
        if self.hidden_dim % self.attention_heads:
            raise ConfigError(
                "attention_heads",
                f"{self.attention_heads} heads do not divide hidden_dim {self.hidden_dim}",
            )
        if len(self.layer_share_mask) != self.num_layers:
            raise ConfigError(
                "layer_share_mask",
                f"has {len(self.layer_share_mask)} entries for {self.num_layers} layers",
            )
        if self.variant is Variant.SELECTIVE and not any(self.layer_share_mask):
            raise ConfigError(
                "layer_share_mask",
                "an all-off mask is rejected for 'selective'; use 'ablation_no_r_no_l'",
            )
        if self.variant is Variant.STL and self.num_tasks != 1:
            raise ConfigError("num_tasks", "'stl' models exactly one task")
        if self.moe_num_experts < 1:
            raise ConfigError("moe_num_experts", "must be a positive integer")
        if len(self.task_weights) != self.num_tasks:
            raise ConfigError(
                "task_weights", f"has {len(self.task_weights)} entries for {self.num_tasks} tasks"
            )
        if any(w < 0 for w in self.task_weights):
            raise ConfigError("task_weights", "weights must be non-negative")
        if schema is not None and len(schema.tasks) != self.num_tasks:
            raise ConfigError(
                "num_tasks", f"config has {self.num_tasks} tasks, the graph {len(schema.tasks)}"
            )
        return self

    def with_changes(self, **changes) -> ModelConfig:
        """A copy with some fields replaced; derived defaults are recomputed."""
        if changes.get("num_layers", self.num_layers) != self.num_layers:
            changes.setdefault("layer_share_mask", None)
        if changes.get("num_tasks", self.num_tasks) != self.num_tasks:
            changes.setdefault("moe_num_experts", None)
            changes.setdefault("task_weights", None)
        return replace(self, **changes)

    def _serialize(self) -> Dict:
        data = asdict(self)
        data["variant"] = self.variant.value
        return data

    def serialize(self, filepath: str = None) -> str:
        """Serializes the config into a json string.

        Args:
            filepath (str):
                Optional; If supplied, the json string will be written to the
                filepath.

        Returns:
            A string in json format representing the config.
        """
        serial = dumps(self._serialize(), cls=ComplexEncoder, indent=2)
        if filepath is not None:
            with open(filepath, "w") as fp:
                fp.write(serial)
        return serial

    @classmethod
    def deserialize(cls, string: str) -> ModelConfig:
        try:
            data = loads(string)
        except JSONDecodeError as e:
            raise ConfigError("config", f"malformed JSON ({e.msg}, line {e.lineno})")
        if not isinstance(data, dict):
            raise ConfigError("model config", "must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(unknown[0], "unknown field")
        try:
            return cls(**data)
        except (TypeError, ValueError) as e:
            raise ConfigError("config", f"malformed field ({e})")

    @classmethod
    def from_file(cls, path) -> ModelConfig:
        try:
            with open(path) as fp:
                string = fp.read()
        except OSError as e:
            raise ConfigError("config", f"cannot read {path} ({e.strerror})")
        return cls.deserialize(string)


MODEL_PRESETS: Dict[str, ModelConfig] = {
    "dblp": ModelConfig(num_layers=3, hidden_dim=64),
    "aminer": ModelConfig(num_layers=3, hidden_dim=64),
    "logistics": ModelConfig(num_layers=4, hidden_dim=128),
}


def model_preset(name: str, **changes) -> ModelConfig:
    if name not in MODEL_PRESETS:
        raise ConfigError("preset", f"unknown model preset '{name}'")
    return MODEL_PRESETS[name].with_changes(**changes)
