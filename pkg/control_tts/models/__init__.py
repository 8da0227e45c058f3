"""Learned components of control-tts (torch).

Author:
    Michael Economou

Date:
    2026-10-17
"""

from control_tts.models.fusion import (
    CodecStage,
    ConditionalNorm,
    FinalUtterance,
    FusionConfig,
    TimbreExtractor,
    assemble_output,
)
from control_tts.models.generator import (
    CodecGenerator,
    DecodeConfig,
    DecodeSchedule,
    GeneratorConfig,
    MaskPlan,
    iterative_decode,
    length_regulate,
    masked_cross_entropy,
    mean_pool_frames,
    sample_mask,
)
from control_tts.models.registry import NoiseMode, NoiseModeRegistry
from control_tts.models.smsd import (
    MixtureParams,
    SmsdConfig,
    SmsdHead,
    mixture_mean,
    smsd_nll,
    smsd_nll_grad,
    smsd_sample,
)
from control_tts.models.style_encoder import StyleTextEncoder
from control_tts.models.tts import ControllableTTS, ModelConfig, SynthesisResult

__all__ = [
    "CodecGenerator",
    "CodecStage",
    "ConditionalNorm",
    "ControllableTTS",
    "DecodeConfig",
    "DecodeSchedule",
    "FinalUtterance",
    "FusionConfig",
    "GeneratorConfig",
    "MaskPlan",
    "MixtureParams",
    "ModelConfig",
    "NoiseMode",
    "NoiseModeRegistry",
    "SmsdConfig",
    "SmsdHead",
    "StyleTextEncoder",
    "SynthesisResult",
    "TimbreExtractor",
    "assemble_output",
    "iterative_decode",
    "length_regulate",
    "masked_cross_entropy",
    "mean_pool_frames",
    "mixture_mean",
    "sample_mask",
    "smsd_nll",
    "smsd_nll_grad",
    "smsd_sample",
]
