"""Glue between the numpy domain and the torch models.

A ModelBundle holds everything synthesis needs: the toy codec and style
extractor of the corpus, the prompt vocabulary, the trained TTS model and
the codec stage. Helpers turn domain records into tensors and synthesized
tensors back into codec matrices and decoded outputs.

Author:
    Michael Economou

Date:
    2026-10-17
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import torch

from control_tts.core.codec import ToyCodec
from control_tts.core.corpus import Corpus
from control_tts.core.layout import CodecMatrix
from control_tts.core.style_extractor import StyleExtractor
from control_tts.models.fusion import CodecStage, FinalUtterance, assemble_output
from control_tts.models.generator import DecodeConfig
from control_tts.models.tts import ControllableTTS
from control_tts.prompts.bank import Vocabulary
from control_tts.training.data import PreparedUtterance, prepare_split
from control_tts.utils.helpers import derive_seed

logger = logging.getLogger(__name__)


@dataclass
class ModelBundle:
    """Trained models together with the corpus-side tables they depend on."""

    toy_codec: ToyCodec
    extractor: StyleExtractor
    vocabulary: Vocabulary
    model: ControllableTTS
    codec_stage: CodecStage

    def eval(self) -> ModelBundle:
        self.model.eval()
        self.codec_stage.eval()
        return self


@dataclass
class CorpusContext:
    """A loaded corpus with the codec, extractor and vocabulary derived from it.

    Attributes:
        corpus: Loaded splits.
        manifest: Corpus manifest.
        toy_codec: Codec rebuilt from the manifest configuration.
        extractor: Fixed style extractor of that configuration.
        vocabulary: Prompt vocabulary recorded in the manifest.
    """

    corpus: Corpus
    manifest: dict[str, Any]
    toy_codec: ToyCodec
    extractor: StyleExtractor
    vocabulary: Vocabulary
    _prepared: dict[str, list[PreparedUtterance]] = field(default_factory=dict, repr=False)

    @classmethod
    def build(cls, corpus: Corpus, manifest: dict[str, Any], vocabulary: Vocabulary) -> CorpusContext:
        return cls(corpus, manifest, ToyCodec(corpus.config), StyleExtractor(corpus.config), vocabulary)

    def prepared(self, split: str) -> list[PreparedUtterance]:
        """Model-ready arrays of a split, built once."""
        if split not in self._prepared:
            self._prepared[split] = prepare_split(
                self.corpus[split], self.toy_codec, self.extractor, self.vocabulary
            )
        return self._prepared[split]

    def bundle(self, model: ControllableTTS, codec_stage: CodecStage) -> ModelBundle:
        return ModelBundle(self.toy_codec, self.extractor, self.vocabulary, model, codec_stage)


@dataclass
class SynthesizedSample:
    """One synthesized utterance and its decoded view.

    Attributes:
        codec: Generated codec matrix.
        output: Decoded attributes, content and timbre readout.
        component: Mixture component the style was drawn from (-1 if pinned).
        durations: Predicted frames per phoneme.
        prompt_all_oov: Whether every prompt word was out of vocabulary.
    """

    codec: CodecMatrix
    output: FinalUtterance
    component: int
    durations: list[int]
    prompt_all_oov: bool


def torch_generator(seed: int, *path: int | str) -> torch.Generator:
    generator = torch.Generator()
    generator.manual_seed(derive_seed(seed, *path))
    return generator


def pad_ids(sequences: Sequence[Sequence[int]]) -> torch.Tensor:
    """Right-pad integer sequences with 0 into a (B, L) long tensor."""
    length = max(len(s) for s in sequences)
    out = torch.zeros((len(sequences), length), dtype=torch.long)
    for i, sequence in enumerate(sequences):
        out[i, : len(sequence)] = torch.as_tensor(list(sequence), dtype=torch.long)
    return out


def synthesize_batch(
    bundle: ModelBundle,
    contents: Sequence[Sequence[int]],
    prompts: Sequence[Sequence[str]],
    timbres: Sequence[np.ndarray],
    rng: torch.Generator,
    decode: DecodeConfig | None = None,
    deterministic_style: bool = False,
) -> list[SynthesizedSample]:
    """Synthesize and decode a batch of (content, prompt, timbre) triples.

    Args:
        bundle: Trained models.
        contents: Phoneme id sequences.
        prompts: Style prompt words.
        timbres: Unit-norm timbre vectors.
        rng: Generator for style sampling and decoding.
        decode: Iterative decoding settings.
        deterministic_style: Use the mixture mean instead of sampling.
    """
    vocab = bundle.vocabulary
    text_ids = pad_ids([[p + 1 for p in content] for content in contents])
    prompt_ids = pad_ids([vocab.encode(list(words)) for words in prompts])
    result = bundle.model.synthesize(
        text_ids,
        text_ids != 0,
        prompt_ids,
        decode=decode,
        rng=rng,
        deterministic_style=deterministic_style,
    )
    samples = []
    layout = bundle.toy_codec.layout
    for b in range(len(contents)):
        n_frames = int(result.frame_mask[b].sum())
        codec = CodecMatrix(result.tokens[b, :n_frames].cpu().numpy(), layout)
        samples.append(
            SynthesizedSample(
                codec=codec,
                output=assemble_output(bundle.codec_stage, bundle.toy_codec, codec, timbres[b]),
                component=int(result.components[b]),
                durations=[int(d) for d in result.durations[b, : len(contents[b])]],
                prompt_all_oov=vocab.is_all_oov(list(prompts[b])),
            )
        )
    return samples


@torch.no_grad()
def extract_timbre(bundle: ModelBundle, prompt_frames: Sequence[np.ndarray]) -> np.ndarray:
    """Timbre embeddings of speech prompts, shape (B, d_t), float64 unit rows."""
    lengths = [f.shape[0] for f in prompt_frames]
    frames = np.zeros((len(prompt_frames), max(lengths), prompt_frames[0].shape[1]))
    for i, f in enumerate(prompt_frames):
        frames[i, : f.shape[0]] = f
    mask = torch.arange(frames.shape[1]).unsqueeze(0) < torch.tensor(lengths).unsqueeze(1)
    embedded = bundle.codec_stage.timbre_extractor(torch.from_numpy(frames).float(), mask)
    out = embedded.double().numpy()
    return out / np.linalg.norm(out, axis=1, keepdims=True)
