"""Corpus split generation.

Builds the five splits of a synthetic corpus. Every utterance is generated
from its own derived seed ``(seed, "corpus", split, index)``, so any record
can be regenerated on its own and the splits may be produced in any order
or in parallel.

Splits:
    train: training speakers, training templates
    test: training speakers, training templates (in-domain test)
    heldout_style: training speakers, heldout templates
    heldout_speaker: heldout speakers, training templates
    many_to_many: fixed styles for the many-to-many study

Author:
    Michael Economou

Date:
    2026-10-17
"""

from __future__ import annotations

import logging
from collections.abc import Callable, Iterator
from dataclasses import dataclass, field

import numpy as np

from control_tts.core.codec import DatasetConfig, PromptSource, SyntheticUtterance, ToyCodec
from control_tts.utils.helpers import derive_seed

logger = logging.getLogger(__name__)

SPLIT_NAMES: tuple[str, ...] = ("train", "test", "heldout_style", "heldout_speaker", "many_to_many")

# Template group ("train" or "heldout") used by each split.
SPLIT_TEMPLATE_GROUP: dict[str, str] = {
    "train": "train",
    "test": "train",
    "heldout_style": "heldout",
    "heldout_speaker": "train",
    "many_to_many": "train",
}

PromptSourceFactory = Callable[[str], PromptSource]


@dataclass
class Corpus:
    """All splits of a generated corpus.

    Attributes:
        config: Generating dataset configuration.
        splits: Split name to its utterances, in generation order.
    """

    config: DatasetConfig
    splits: dict[str, list[SyntheticUtterance]] = field(default_factory=dict)

    def __getitem__(self, split: str) -> list[SyntheticUtterance]:
        if split not in self.splits:
            raise KeyError(f"Split '{split}' not in corpus (have {sorted(self.splits)})")
        return self.splits[split]

    def sizes(self) -> dict[str, int]:
        return {name: len(records) for name, records in self.splits.items()}

    def __iter__(self) -> Iterator[SyntheticUtterance]:
        for name in SPLIT_NAMES:
            yield from self.splits.get(name, [])


def split_speakers(config: DatasetConfig, split: str) -> tuple[int, ...]:
    """Speaker pool a split draws from."""
    if split not in SPLIT_NAMES:
        raise ValueError(f"Unknown split '{split}'")
    if split == "heldout_speaker":
        return config.heldout_speakers
    return config.train_speakers


def utterance_rng(config: DatasetConfig, split: str, index: int) -> np.random.Generator:
    """Random generator of one corpus record."""
    return np.random.default_rng(derive_seed(config.seed, "corpus", split, index))


def generate_record(
    codec: ToyCodec, split: str, index: int, prompt_source: PromptSource | None = None
) -> SyntheticUtterance:
    """Regenerate record ``index`` of ``split``."""
    rng = utterance_rng(codec.config, split, index)
    speaker_id = int(rng.choice(np.asarray(split_speakers(codec.config, split))))
    return codec.synth_utterance(
        rng,
        speaker_id=speaker_id,
        prompt_source=prompt_source,
        utterance_id=f"{split}-{index:06d}",
    )


def generate_split(
    codec: ToyCodec, split: str, n: int, prompt_source: PromptSource | None = None
) -> list[SyntheticUtterance]:
    """Generate the first n records of a split."""
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    return [generate_record(codec, split, index, prompt_source) for index in range(n)]


def generate_corpus(codec: ToyCodec, prompt_sources: PromptSourceFactory | None = None) -> Corpus:
    """Generate every split at the sizes recorded in the configuration.

    Args:
        codec: Toy codec bound to the dataset configuration.
        prompt_sources: Maps a template group name ("train" / "heldout") to a
            prompt source; None uses plain keyword prompts.

    Returns:
        Corpus with all five splits.
    """
    corpus = Corpus(codec.config)
    for split, n in codec.config.split_sizes.items():
        source = prompt_sources(SPLIT_TEMPLATE_GROUP[split]) if prompt_sources else None
        corpus.splits[split] = generate_split(codec, split, n, source)
        logger.info("Generated split %s with %d utterances", split, n)
    return corpus
