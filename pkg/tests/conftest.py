#!/usr/bin/env python
"""Pytest configuration for control_tts tests.

Provides a small dataset configuration, its toy codec and corpus, a tiny
model configuration and seeded generators, so most tests run in well under
a second on a CPU.

Author:
    Michael Economou

Date:
    2026-10-17
"""

import numpy as np
import pytest  # type: ignore[import-untyped]
import torch

from control_tts.core import ToyCodec, generate_corpus, make_generator_config
from control_tts.core.style_extractor import StyleExtractor
from control_tts.models import FusionConfig, GeneratorConfig, ModelConfig, SmsdConfig
from control_tts.pipeline import CorpusContext
from control_tts.prompts import default_bank
from control_tts.training import TrainConfig

SMALL_SPLITS = {
    "n_train": 40,
    "n_test": 8,
    "n_heldout_style": 8,
    "n_heldout_speaker": 8,
    "n_many_to_many": 4,
}

# Command-line overrides giving a corpus and model small enough for CLI tests.
TINY_OVERRIDES = [
    "data.n_speakers=10",
    "data.n_heldout_speakers=2",
    "data.text_vocab=20",
    "data.n_train=24",
    "data.n_test=6",
    "data.n_heldout_style=6",
    "data.n_heldout_speaker=6",
    "data.n_many_to_many=2",
    "model.d_prompt_embed=16",
    "model.smsd.hidden=16",
    "model.generator.d_hidden=32",
    "model.generator.n_heads=2",
    "model.generator.d_ff=64",
    "model.generator.n_text_blocks=1",
    "model.generator.n_decoder_blocks=1",
    "model.generator.max_positions=64",
    "model.generator.duration_channels=32",
    "model.fusion.d_hidden=16",
    "model.fusion.n_heads=2",
    "model.fusion.n_blocks=1",
    "train.batch_frames=256",
    "train.warmup_steps=2",
    "train.total_steps=4",
    "train.checkpoint_every=2",
    "train.log_every=1",
    "decode.iterations_first=2",
    "decode.iterations_rest=1",
    "eval.n=4",
    "eval.n_styles=2",
    "eval.n_samples=3",
    "eval.batch_size=4",
]


@pytest.fixture(scope="session")
def small_config():
    """Validated dataset configuration with small splits."""
    return make_generator_config(seed=7, n_speakers=10, text_vocab=20, **SMALL_SPLITS)


@pytest.fixture(scope="session")
def toy_codec(small_config):
    return ToyCodec(small_config)


@pytest.fixture(scope="session")
def extractor(small_config):
    return StyleExtractor(small_config)


@pytest.fixture(scope="session")
def bank():
    return default_bank()


@pytest.fixture(scope="session")
def vocabulary(bank):
    return bank.vocabulary()


@pytest.fixture(scope="session")
def corpus(toy_codec, bank):
    """All five splits of the small corpus, generated once per session."""
    return generate_corpus(toy_codec, bank.prompt_source)


@pytest.fixture(scope="session")
def context(corpus, bank, vocabulary, toy_codec):
    manifest = {
        "splits": corpus.sizes(),
        "speakers": {
            "train": list(corpus.config.train_speakers),
            "heldout": list(corpus.config.heldout_speakers),
        },
        "template_groups": {g: sorted(bank.template_ids(g)) for g in ("train", "heldout")},
        "vocabulary": vocabulary.words,
    }
    return CorpusContext.build(corpus, manifest, vocabulary)


@pytest.fixture
def tiny_generator_config():
    return GeneratorConfig(
        d_hidden=32,
        n_heads=2,
        d_ff=64,
        n_text_blocks=1,
        n_decoder_blocks=1,
        max_positions=64,
        duration_channels=32,
    )


@pytest.fixture
def tiny_model_config(small_config, vocabulary, tiny_generator_config):
    """Model configuration sized for fast CPU tests."""
    return ModelConfig(
        text_vocab=small_config.text_vocab,
        prompt_vocab=len(vocabulary),
        d_style=small_config.d_style,
        d_timbre=small_config.d_timbre,
        d_prompt_embed=16,
        layout=small_config.layout,
        smsd=SmsdConfig(hidden=16),
        generator=tiny_generator_config,
        fusion=FusionConfig(d_hidden=16, n_heads=2, n_blocks=1),
    )


@pytest.fixture
def tiny_train_config():
    return TrainConfig(
        batch_frames=256, warmup_steps=2, total_steps=10, checkpoint_every=0, log_every=1, seed=7
    )


@pytest.fixture
def rng():
    """Fresh numpy Generator with a fixed seed."""
    return np.random.default_rng(1234)


@pytest.fixture
def torch_rng():
    """Fresh torch Generator with a fixed seed."""
    generator = torch.Generator()
    generator.manual_seed(1234)
    return generator
