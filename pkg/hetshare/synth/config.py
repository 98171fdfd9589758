from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields, replace
from json import JSONDecodeError, dumps, loads
from typing import Dict, List, Optional

from ..model import ConfigError
from ..utils import ComplexEncoder
from .exceptions import InvalidSignalPlan

TARGET_TYPE = "T"
NEIGHBOR_TYPES = ("A", "B", "C")
RELATIONS = {"r_shared": "A", "r_task1": "B", "r_task2": "C"}

SignalPlan = Dict[str, float]


@dataclass
class SynthConfig:
    """A synthetic graph with planted relation signals.

    Targets of type `T` receive neighbors of types `A`, `B` and `C` over
    `r_shared`, `r_task1` and `r_task2`. The label of task t thresholds a
    weighted sum, over the relations of its signal plan, of the neighbors'
    mean feature projected on a hidden per-relation direction.

    Attributes:
        num_targets (int):
            Nodes of type T.
        neighbors_per_relation (int):
            Neighbors every target draws per relation.
        feature_dim (int):
            Feature width of every node type.
        noise_std (float):
            Standard deviation of the noise added to every score.
        signal_plan (List[SignalPlan]):
            Per task, relation weights summing to 1. One task per entry.
        positive_rate (List[float]):
            Per task, the fraction of positives: the threshold is the
            `1 - rate` quantile of the noise-free scores. Defaults to 0.5.
        label_fraction (List[float]):
            Per task, the fraction of targets that carry a label. Defaults to 1.
        pool_size (int):
            Nodes of each neighbor type. Defaults to `num_targets`.
        seed (int):
            Seed of the generation.
    """

    num_targets: int = 1000
    neighbors_per_relation: int = 5
    feature_dim: int = 8
    noise_std: float = 0.1
    signal_plan: List[SignalPlan] = field(
        default_factory=lambda: [
            {"r_shared": 0.5, "r_task1": 0.5},
            {"r_shared": 0.5, "r_task2": 0.5},
        ]
    )
    positive_rate: Optional[List[float]] = None
    label_fraction: Optional[List[float]] = None
    pool_size: Optional[int] = None
    seed: int = 0

    def __post_init__(self):
        tasks = len(self.signal_plan)
        if self.positive_rate is None:
            self.positive_rate = [0.5] * tasks
        if self.label_fraction is None:
            self.label_fraction = [1.0] * tasks
        if self.pool_size is None:
            self.pool_size = self.num_targets

    @property
    def num_tasks(self) -> int:
        return len(self.signal_plan)

    def validate(self) -> SynthConfig:
        """
        Raises:
            InvalidSignalPlan: A plan references an undeclared relation, has a
                negative weight or does not sum to 1.
            ConfigError: Any other invalid field.
        """
        if not self.signal_plan:
            raise ConfigError("signal_plan", "at least one task is required")
        for task, plan in enumerate(self.signal_plan):
            unknown = sorted(set(plan) - set(RELATIONS))
            if unknown:
                raise InvalidSignalPlan(task, f"unknown relation '{unknown[0]}'")
            if not plan:
                raise InvalidSignalPlan(task, "no relation carries signal")
            if any(w < 0 for w in plan.values()):
                raise InvalidSignalPlan(task, "weights must be non-negative")
            if abs(sum(plan.values()) - 1.0) > 1e-9:
                raise InvalidSignalPlan(task, f"weights sum to {sum(plan.values()):g}")
        if self.num_targets < 3:
            raise ConfigError("num_targets", "at least 3 targets are required")
        if self.neighbors_per_relation < 1:
            raise ConfigError("neighbors_per_relation", "must be at least 1")
        if self.pool_size < self.neighbors_per_relation:
            raise ConfigError("pool_size", "must hold at least neighbors_per_relation nodes")
        if self.feature_dim < 1:
            raise ConfigError("feature_dim", "must be at least 1")
        if self.noise_std < 0:
            raise ConfigError("noise_std", "must be non-negative")
        for name in ("positive_rate", "label_fraction"):
            values = getattr(self, name)
            if len(values) != self.num_tasks:
                raise ConfigError(name, f"needs one entry per task ({self.num_tasks})")
            if any(not 0 < v <= 1 for v in values):
                raise ConfigError(name, "entries must lie in (0, 1]")
        return self

    def with_changes(self, **changes) -> SynthConfig:
        if "signal_plan" in changes:
            changes.setdefault("positive_rate", None)
            changes.setdefault("label_fraction", None)
        if "num_targets" in changes:
            changes.setdefault("pool_size", None)
        return replace(self, **changes)

    def _serialize(self) -> Dict:
        return asdict(self)

    def serialize(self, filepath: str = None) -> str:
        serial = dumps(self._serialize(), cls=ComplexEncoder, indent=2)
        if filepath is not None:
            with open(filepath, "w") as fp:
                fp.write(serial)
        return serial

    @classmethod
    def deserialize(cls, string: str) -> SynthConfig:
        try:
            data = loads(string)
        except JSONDecodeError as e:
            raise ConfigError("config", f"malformed JSON ({e.msg}, line {e.lineno})")
        if not isinstance(data, dict):
            raise ConfigError("synth config", "must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(unknown[0], "unknown field")
        try:
            return cls(**data)
        except (TypeError, ValueError) as e:
            raise ConfigError("config", f"malformed field ({e})")

    @classmethod
    def from_file(cls, path) -> SynthConfig:
        try:
            with open(path) as fp:
                string = fp.read()
        except OSError as e:
            raise ConfigError("config", f"cannot read {path} ({e.strerror})")
        return cls.deserialize(string)


_DISJOINT = [{"r_shared": 0.5, "r_task1": 0.5}, {"r_shared": 0.5, "r_task2": 0.5}]

SYNTH_PRESETS: Dict[str, SynthConfig] = {
    "shared": SynthConfig(signal_plan=[{"r_shared": 1.0}, {"r_shared": 1.0}]),
    "disjoint": SynthConfig(signal_plan=_DISJOINT, label_fraction=[1.0, 0.3]),
    "single_task": SynthConfig(signal_plan=[{"r_task1": 1.0}]),
    "sparse": SynthConfig(
        num_targets=5000, signal_plan=_DISJOINT, positive_rate=[0.02, 0.02]
    ),
    "very_sparse": SynthConfig(
        num_targets=20000, signal_plan=_DISJOINT, positive_rate=[0.002, 0.002]
    ),
    "zero_noise": SynthConfig(noise_std=0.0, signal_plan=_DISJOINT),
}


def synth_preset(name: str, **changes) -> SynthConfig:
    if name not in SYNTH_PRESETS:
        raise ConfigError("preset", f"unknown synthetic preset '{name}'")
    return SYNTH_PRESETS[name].with_changes(**changes)
