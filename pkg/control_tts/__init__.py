"""control-tts - style-controllable, timbre-cloning TTS over a synthetic codec.

A desk-scale system that turns text plus a natural-language style prompt
into discrete codec tokens, samples style degrees from a mixture density
head, and fuses a speaker's timbre through conditional normalization. A
synthetic codec with an exactly invertible attribute oracle replaces real
audio, so every evaluation is exact.

Core Components:
    ToyCodec: Synthetic disentangled codec with exact decoders.
    TemplateBank: Style prompt templates, lexicon and vocabulary.
    SmsdHead: Mixture density head over style vectors.
    ControllableTTS: Text encoder, style fusion, durations, codec generator.
    CodecStage: Timbre extraction and conditional-normalization fusion.

Extension Points:
    NoiseModeRegistry: Register variance tying modes for the mixture head.

Example:
    Generating a corpus programmatically::

        from control_tts import ToyCodec, default_bank, generate_corpus, make_generator_config

        codec = ToyCodec(make_generator_config(seed=7, n_speakers=20, text_vocab=40))
        corpus = generate_corpus(codec, default_bank().prompt_source)

Author:
    Michael Economou

Date:
    2026-10-17
"""

__version__ = "1.0.0"
__author__ = "Michael Economou"

from control_tts.core import (
    AttributeLabels,
    ChannelLayout,
    CodecMatrix,
    Corpus,
    DatasetConfig,
    StyleExtractor,
    SyntheticUtterance,
    ToyCodec,
    UnknownPatternError,
    generate_corpus,
    make_generator_config,
)
from control_tts.evaluation import (
    AblationGrid,
    EvalConfig,
    EvalReport,
    eval_control,
    eval_many_to_many,
    run_ablations,
    score_codecs,
)
from control_tts.models import (
    CodecStage,
    ControllableTTS,
    ModelConfig,
    NoiseMode,
    NoiseModeRegistry,
    SmsdConfig,
    SmsdHead,
)
from control_tts.pipeline import CorpusContext, ModelBundle
from control_tts.prompts import StylePrompt, TemplateBank, Vocabulary, default_bank, generate_style_prompts
from control_tts.run_config import ConfigError, RunConfig
from control_tts.training import TrainConfig, Trainer, create_train_state, train_step

__all__ = [
    "__version__",
    "AblationGrid",
    "AttributeLabels",
    "ChannelLayout",
    "CodecMatrix",
    "CodecStage",
    "ConfigError",
    "ControllableTTS",
    "Corpus",
    "CorpusContext",
    "DatasetConfig",
    "EvalConfig",
    "EvalReport",
    "ModelBundle",
    "ModelConfig",
    "NoiseMode",
    "NoiseModeRegistry",
    "RunConfig",
    "SmsdConfig",
    "SmsdHead",
    "StyleExtractor",
    "StylePrompt",
    "SyntheticUtterance",
    "TemplateBank",
    "ToyCodec",
    "TrainConfig",
    "Trainer",
    "UnknownPatternError",
    "Vocabulary",
    "create_train_state",
    "default_bank",
    "eval_control",
    "eval_many_to_many",
    "generate_corpus",
    "generate_style_prompts",
    "make_generator_config",
    "run_ablations",
    "score_codecs",
    "train_step",
]
