"""Salient object detection from corner-background and objectness priors,
fused per superpixel scale and integrated across scales."""

from .config import ConfigError, PipelineConfig, load_config, parse_config, serialize_config
from .evaluate import EvalReport, adaptive_f, evaluate_dataset, f_measure, pr_curve, synth_corpus
from .multilayer import PipelineError, PipelineResult, run_pipeline, run_scale
from .pixel_core import read_image, read_mask, write_map

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "EvalReport",
    "PipelineConfig",
    "PipelineError",
    "PipelineResult",
    "adaptive_f",
    "evaluate_dataset",
    "f_measure",
    "load_config",
    "parse_config",
    "pr_curve",
    "read_image",
    "read_mask",
    "run_pipeline",
    "run_scale",
    "serialize_config",
    "synth_corpus",
    "write_map",
    "__version__",
]
