""".. include:: ../../docs/templates/synth.md"""

from .config import SynthConfig, SYNTH_PRESETS, synth_preset, RELATIONS, TARGET_TYPE
from .generator import generate, write_synthetic, GroundTruth, GROUND_TRUTH_FILE
from .experiment import (
    interference_experiment,
    bench_time,
    ablation_sweep,
    progressive_masks,
    mask_setting,
    score_variant,
    variant_config,
    ExperimentResult,
    RESULT_COLUMNS,
    TIMING_COLUMNS,
    ABLATION_COLUMNS,
    ABLATION_VARIANTS,
)
from .exceptions import InvalidSignalPlan

__all__ = [
    "SynthConfig",
    "SYNTH_PRESETS",
    "synth_preset",
    "RELATIONS",
    "TARGET_TYPE",
    "generate",
    "write_synthetic",
    "GroundTruth",
    "GROUND_TRUTH_FILE",
    "interference_experiment",
    "bench_time",
    "ablation_sweep",
    "progressive_masks",
    "mask_setting",
    "score_variant",
    "variant_config",
    "ExperimentResult",
    "RESULT_COLUMNS",
    "TIMING_COLUMNS",
    "ABLATION_COLUMNS",
    "ABLATION_VARIANTS",
    "InvalidSignalPlan",
]
