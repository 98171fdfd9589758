""".. include:: ../../docs/templates/model.md"""

from .config import ModelConfig, Variant, MODEL_PRESETS, model_preset
from .build import (
    build_variant,
    parameter_layout,
    check_parameters,
    count_parameters,
    parameter_census,
    complexity_estimate,
    task_owner,
    expert_owner,
)
from .forward import ForwardResult, forward, loss, task_losses
from .exceptions import ConfigError, ParameterMismatch, LabelKindMismatch

__all__ = [
    "ModelConfig",
    "Variant",
    "MODEL_PRESETS",
    "model_preset",
    "build_variant",
    "parameter_layout",
    "check_parameters",
    "count_parameters",
    "parameter_census",
    "complexity_estimate",
    "task_owner",
    "expert_owner",
    "ForwardResult",
    "forward",
    "loss",
    "task_losses",
    "ConfigError",
    "ParameterMismatch",
    "LabelKindMismatch",
]
