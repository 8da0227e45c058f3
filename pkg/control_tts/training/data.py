"""Training batches.

Utterances are prepared once into arrays (phoneme ids, prompt ids, style
targets, prompt frames) and packed into batches under a frame budget.
The batch order of an epoch is a pure function of (seed, epoch), so a
resumed run finds its position from the step counter alone.

Author:
    Michael Economou

Date:
    2026-10-17
"""

from __future__ import annotations

import logging
from collections.abc import Iterator, Sequence
from dataclasses import dataclass

import numpy as np
import torch

from control_tts.core.codec import SyntheticUtterance, ToyCodec
from control_tts.core.layout import split_style
from control_tts.core.style_extractor import StyleExtractor
from control_tts.prompts.bank import Vocabulary
from control_tts.utils.helpers import derive_seed

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PreparedUtterance:
    """Array view of one utterance as the model consumes it."""

    utterance_id: str
    speaker_id: int
    template_id: int | None
    text_ids: np.ndarray
    durations: np.ndarray
    prompt_ids: np.ndarray
    codec: np.ndarray
    style: np.ndarray
    timbre: np.ndarray
    prompt_frames: np.ndarray

    @property
    def n_frames(self) -> int:
        return int(self.codec.shape[0])


def prepare_utterance(
    utterance: SyntheticUtterance,
    toy_codec: ToyCodec,
    extractor: StyleExtractor,
    vocabulary: Vocabulary,
) -> PreparedUtterance:
    """Build the arrays of one utterance; phoneme ids are shifted by one."""
    _, style_channels = split_style(utterance.codec)
    return PreparedUtterance(
        utterance_id=utterance.utterance_id,
        speaker_id=utterance.speaker_id,
        template_id=utterance.template_id,
        text_ids=np.asarray(utterance.content_tokens, dtype=np.int64) + 1,
        durations=np.asarray(utterance.durations, dtype=np.int64),
        prompt_ids=np.asarray(vocabulary.encode(utterance.style_text), dtype=np.int64),
        codec=utterance.codec.tokens,
        style=extractor(style_channels),
        timbre=utterance.timbre,
        prompt_frames=toy_codec.render_prompt_frames(utterance),
    )


def prepare_split(
    utterances: Sequence[SyntheticUtterance],
    toy_codec: ToyCodec,
    extractor: StyleExtractor,
    vocabulary: Vocabulary,
) -> list[PreparedUtterance]:
    return [prepare_utterance(u, toy_codec, extractor, vocabulary) for u in utterances]


@dataclass
class Batch:
    """Padded tensors of a batch.

    Attributes:
        text_ids: (B, L) shifted phoneme ids, 0 at padding.
        text_mask: (B, L) bool.
        durations: (B, L) frames per phoneme, 0 at padding.
        prompt_ids: (B, P) prompt word ids, 0 at padding.
        codec: (B, T, N) codec tokens, 0 at padding.
        frame_mask: (B, T) bool.
        style: (B, d_s) ground-truth style vectors.
        timbre: (B, d_t) timbre vectors.
        prompt_frames: (B, T, d_t) speech prompt frames.
        speaker_ids: (B,) speakers.
        template_ids: Template id per element.
        utterance_ids: Identifier per element.
    """

    text_ids: torch.Tensor
    text_mask: torch.Tensor
    durations: torch.Tensor
    prompt_ids: torch.Tensor
    codec: torch.Tensor
    frame_mask: torch.Tensor
    style: torch.Tensor
    timbre: torch.Tensor
    prompt_frames: torch.Tensor
    speaker_ids: torch.Tensor
    template_ids: list[int | None]
    utterance_ids: list[str]

    def __len__(self) -> int:
        return int(self.text_ids.shape[0])

    def to(self, device: torch.device | str) -> Batch:
        tensors = {
            name: getattr(self, name).to(device)
            for name in (
                "text_ids", "text_mask", "durations", "prompt_ids", "codec",
                "frame_mask", "style", "timbre", "prompt_frames", "speaker_ids",
            )
        }
        return Batch(**tensors, template_ids=self.template_ids, utterance_ids=self.utterance_ids)


def _pad(arrays: list[np.ndarray], dtype: np.dtype) -> np.ndarray:
    length = max(a.shape[0] for a in arrays)
    out = np.zeros((len(arrays), length, *arrays[0].shape[1:]), dtype=dtype)
    for i, array in enumerate(arrays):
        out[i, : array.shape[0]] = array
    return out


def collate(records: Sequence[PreparedUtterance]) -> Batch:
    """Pad and stack prepared utterances into a Batch."""
    if not records:
        raise ValueError("cannot collate an empty batch")
    text_ids = torch.from_numpy(_pad([r.text_ids for r in records], np.int64))
    codec = torch.from_numpy(_pad([r.codec for r in records], np.int64))
    lengths = torch.tensor([r.n_frames for r in records])
    return Batch(
        text_ids=text_ids,
        text_mask=text_ids != 0,
        durations=torch.from_numpy(_pad([r.durations for r in records], np.int64)),
        prompt_ids=torch.from_numpy(_pad([r.prompt_ids for r in records], np.int64)),
        codec=codec,
        frame_mask=torch.arange(codec.shape[1]).unsqueeze(0) < lengths.unsqueeze(1),
        style=torch.from_numpy(np.stack([r.style for r in records])).float(),
        timbre=torch.from_numpy(np.stack([r.timbre for r in records])).float(),
        prompt_frames=torch.from_numpy(_pad([r.prompt_frames for r in records], np.float64)).float(),
        speaker_ids=torch.tensor([r.speaker_id for r in records]),
        template_ids=[r.template_id for r in records],
        utterance_ids=[r.utterance_id for r in records],
    )


def plan_batches(n_frames: Sequence[int], batch_frames: int, seed: int, epoch: int) -> list[list[int]]:
    """Shuffle and pack utterance indices under a padded frame budget.

    A batch holds as many utterances as fit ``count * max_frames <= batch_frames``,
    and always at least one.
    """
    if batch_frames < 1:
        raise ValueError(f"batch_frames must be positive, got {batch_frames}")
    order = np.random.default_rng(derive_seed(seed, "batch_order", epoch)).permutation(len(n_frames))
    batches: list[list[int]] = []
    current: list[int] = []
    longest = 0
    for index in order.tolist():
        candidate = max(longest, n_frames[index])
        if current and candidate * (len(current) + 1) > batch_frames:
            batches.append(current)
            current, candidate = [], n_frames[index]
        current.append(index)
        longest = candidate
    if current:
        batches.append(current)
    return batches


class BatchStream:
    """Step-indexed batches over repeated epochs."""

    def __init__(self, records: Sequence[PreparedUtterance], batch_frames: int, seed: int) -> None:
        if not records:
            raise ValueError("training split is empty")
        self.records = list(records)
        self.batch_frames = batch_frames
        self.seed = seed
        self._lengths = [r.n_frames for r in self.records]
        self._plans: list[list[list[int]]] = []

    def _plan(self, epoch: int) -> list[list[int]]:
        while len(self._plans) <= epoch:
            self._plans.append(
                plan_batches(self._lengths, self.batch_frames, self.seed, len(self._plans))
            )
        return self._plans[epoch]

    def locate(self, step: int) -> tuple[int, int]:
        """(epoch, batch index within the epoch) of a global step."""
        epoch = 0
        while step >= len(self._plan(epoch)):
            step -= len(self._plan(epoch))
            epoch += 1
        return epoch, step

    def batch_at(self, step: int) -> Batch:
        epoch, index = self.locate(step)
        return collate([self.records[i] for i in self._plan(epoch)[index]])

    def iter_from(self, step: int) -> Iterator[tuple[int, Batch]]:
        while True:
            yield step, self.batch_at(step)
            step += 1
