"""Synthetic disentangled codec and utterance generator.

This module stands in for a pretrained factorized speech codec. Attribute
labels are written into the style channels by an invertible construction,
so every controllability metric has an exact oracle:

    - content channels carry the phoneme id of each frame (channel 0) and the
      frame offset inside its phoneme (channel 1); extra content channels
      repeat channel 0
    - style channels (prosody then acoustic) carry the style attributes;
      attributes are assigned round-robin to style channels and each channel
      holds the mixed-radix code of its attributes' (label, degree-bin)
      digits, shifted by one so token 0 is never a valid style token
    - timbre is a global vector outside the matrix

With the default layout the prosody channel carries (pitch, gender) and the
three acoustic channels carry speed, energy and emotion.

Key Responsibilities:
    - DatasetConfig creation and validation (make_generator_config)
    - Utterance synthesis from an explicit numpy Generator (synth_utterance)
    - Exact decoding of attributes and content (decode_attributes, decode_content)
    - Lenient decoding of generated codecs for scoring (read_attributes)
    - Speaker timbre vectors and toy speech-prompt frames

Author:
    Michael Economou

Date:
    2026-10-17
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from collections.abc import Callable
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from control_tts.core.labels import (
    GRADED_ATTRIBUTES,
    STYLE_ATTRIBUTES,
    AttributeLabels,
    CategorySets,
    Degrees,
)
from control_tts.core.layout import ChannelLayout, CodecMatrix
from control_tts.core.serializable import Serializable
from control_tts.utils.helpers import derive_seed

logger = logging.getLogger(__name__)

DEFAULT_SPEED_MULTIPLIERS: dict[str, float] = {"slow": 1.4, "normal": 1.0, "fast": 0.7}

# Callable producing (style words, template id) for a label tuple.
PromptSource = Callable[[AttributeLabels, np.random.Generator], tuple[list[str], int | None]]


class UnknownPatternError(Exception):
    """Raised when codec tokens match no pattern of the generating layout."""


@dataclass(frozen=True)
class DatasetConfig(Serializable):
    """Settings of the synthetic corpus generator.

    Attributes:
        seed: Master seed; same seed gives an identical corpus.
        n_speakers: Number of synthetic speakers.
        n_heldout_speakers: Speakers reserved for the heldout-speaker split.
        text_vocab: Number of phoneme ids.
        layout: Codec channel layout.
        n_emotions: Number of emotion classes (neutral first).
        n_degree_bins: Resolution of the degree grid within a label bin.
        d_timbre: Timbre embedding dimension.
        d_style: Style vector dimension.
        min_text_len: Shortest phoneme sequence.
        max_text_len: Longest phoneme sequence.
        max_frames: Upper bound on T checked at validation time.
        base_durations: Candidate per-phoneme base durations in frames.
        speed_multipliers: Duration multiplier per speed class.
        duration_jitter: Half-width of the uniform duration jitter.
        timbre_jitter: Half-width of the uniform per-utterance timbre jitter.
        degree_scale: Slope of the style vector magnitude in the degree.
        prompt_content_scale: Weight of the content projection in prompt frames.
        n_train: Training utterances.
        n_test: In-domain test utterances.
        n_heldout_style: Utterances prompted with heldout templates.
        n_heldout_speaker: Utterances of heldout speakers.
        n_many_to_many: Fixed styles of the many-to-many split.
    """

    seed: int = 7
    n_speakers: int = 20
    n_heldout_speakers: int = 4
    text_vocab: int = 40
    layout: ChannelLayout = field(default_factory=ChannelLayout)
    n_emotions: int = 5
    n_degree_bins: int = 10
    d_timbre: int = 32
    d_style: int = 16
    min_text_len: int = 4
    max_text_len: int = 9
    max_frames: int = 48
    base_durations: tuple[int, ...] = (2, 3)
    speed_multipliers: dict[str, float] = field(
        default_factory=lambda: dict(DEFAULT_SPEED_MULTIPLIERS)
    )
    duration_jitter: float = 0.15
    timbre_jitter: float = 0.05
    degree_scale: float = 0.8
    prompt_content_scale: float = 0.5
    n_train: int = 2400
    n_test: int = 300
    n_heldout_style: int = 300
    n_heldout_speaker: int = 300
    n_many_to_many: int = 40

    def __post_init__(self) -> None:
        # Merged configurations deliver sequences as lists.
        object.__setattr__(self, "base_durations", tuple(self.base_durations))
        object.__setattr__(self, "speed_multipliers", dict(self.speed_multipliers))

    @property
    def categories(self) -> CategorySets:
        return CategorySets.with_emotions(self.n_emotions)

    @property
    def split_sizes(self) -> dict[str, int]:
        return {
            "train": self.n_train,
            "test": self.n_test,
            "heldout_style": self.n_heldout_style,
            "heldout_speaker": self.n_heldout_speaker,
            "many_to_many": self.n_many_to_many,
        }

    @property
    def train_speakers(self) -> tuple[int, ...]:
        return tuple(range(self.n_speakers - self.n_heldout_speakers))

    @property
    def heldout_speakers(self) -> tuple[int, ...]:
        return tuple(range(self.n_speakers - self.n_heldout_speakers, self.n_speakers))

    def worst_case_frames(self) -> int:
        slowest = max(self.speed_multipliers.values())
        longest = max(self.base_durations) * slowest * (1.0 + self.duration_jitter)
        return self.max_text_len * max(1, int(np.rint(longest)))

    def validate(self) -> None:
        """Check value ranges and capacity constraints.

        Raises:
            ValueError: If any count is non-positive or the layout cannot hold
                the attribute codes.
        """
        positive = {
            "n_speakers": self.n_speakers,
            "text_vocab": self.text_vocab,
            "n_degree_bins": self.n_degree_bins,
            "d_timbre": self.d_timbre,
            "d_style": self.d_style,
            "min_text_len": self.min_text_len,
            "max_frames": self.max_frames,
        }
        for name, value in positive.items():
            if value <= 0:
                raise ValueError(f"{name} must be positive, got {value}")
        for name, value in self.split_sizes.items():
            if value < 0:
                raise ValueError(f"n_{name} must be non-negative, got {value}")
        if not 0 <= self.n_heldout_speakers < self.n_speakers:
            raise ValueError(
                f"n_heldout_speakers must be in [0, {self.n_speakers}), "
                f"got {self.n_heldout_speakers}"
            )
        if self.max_text_len < self.min_text_len:
            raise ValueError("max_text_len must be >= min_text_len")
        if not self.base_durations or min(self.base_durations) < 1:
            raise ValueError("base_durations must be non-empty positive integers")
        if set(self.speed_multipliers) != set(self.categories.speed):
            raise ValueError(f"speed_multipliers must cover {self.categories.speed}")
        if not 0.0 <= self.duration_jitter < 1.0:
            raise ValueError("duration_jitter must be in [0, 1)")
        layout = self.layout
        if layout.n_content < 1:
            raise ValueError("layout needs at least one content channel")
        if layout.n_style < 1:
            raise ValueError("layout needs at least one style channel")
        if self.text_vocab + 1 > layout.codebook_size:
            raise ValueError(
                f"text_vocab={self.text_vocab} does not fit codebook_size={layout.codebook_size}"
            )
        # Raises on insufficient codebook capacity.
        StyleCodeTable(self)
        one_hot = sum(len(self.categories.domain(name)) for name in STYLE_ATTRIBUTES)
        if self.d_style < one_hot:
            raise ValueError(f"d_style must be >= {one_hot} for these categories")
        if self.worst_case_frames() > self.max_frames:
            raise ValueError(
                f"worst-case utterance length {self.worst_case_frames()} exceeds "
                f"max_frames={self.max_frames}"
            )

    def serialize(self) -> dict[str, Any]:
        return {
            "seed": self.seed,
            "n_speakers": self.n_speakers,
            "n_heldout_speakers": self.n_heldout_speakers,
            "text_vocab": self.text_vocab,
            "layout": self.layout.serialize(),
            "n_emotions": self.n_emotions,
            "n_degree_bins": self.n_degree_bins,
            "d_timbre": self.d_timbre,
            "d_style": self.d_style,
            "min_text_len": self.min_text_len,
            "max_text_len": self.max_text_len,
            "max_frames": self.max_frames,
            "base_durations": list(self.base_durations),
            "speed_multipliers": dict(sorted(self.speed_multipliers.items())),
            "duration_jitter": self.duration_jitter,
            "timbre_jitter": self.timbre_jitter,
            "degree_scale": self.degree_scale,
            "prompt_content_scale": self.prompt_content_scale,
            "n_train": self.n_train,
            "n_test": self.n_test,
            "n_heldout_style": self.n_heldout_style,
            "n_heldout_speaker": self.n_heldout_speaker,
            "n_many_to_many": self.n_many_to_many,
        }

    @classmethod
    def deserialize(cls, data: dict[str, Any]) -> DatasetConfig:
        values = dict(data)
        values["layout"] = ChannelLayout.deserialize(values["layout"])
        values["base_durations"] = tuple(int(v) for v in values["base_durations"])
        values["speed_multipliers"] = {
            str(k): float(v) for k, v in values["speed_multipliers"].items()
        }
        return cls(**values)


def make_generator_config(
    seed: int,
    n_speakers: int,
    text_vocab: int,
    layout: ChannelLayout | None = None,
    **overrides: Any,
) -> DatasetConfig:
    """Create a validated generator configuration.

    Args:
        seed: Master seed of the corpus.
        n_speakers: Number of synthetic speakers (positive).
        text_vocab: Number of phoneme ids (positive).
        layout: Channel layout, defaults to 2 content / 1 prosody / 3 acoustic.
        **overrides: Any other DatasetConfig field.

    Returns:
        Validated DatasetConfig.

    Raises:
        ValueError: If a count is non-positive or the layout is invalid.
    """
    if n_speakers <= 0:
        raise ValueError(f"n_speakers must be positive, got {n_speakers}")
    if text_vocab <= 0:
        raise ValueError(f"text_vocab must be positive, got {text_vocab}")
    if "n_heldout_speakers" not in overrides:
        overrides["n_heldout_speakers"] = n_speakers // 5
    config = DatasetConfig(
        seed=seed,
        n_speakers=n_speakers,
        text_vocab=text_vocab,
        layout=layout if layout is not None else ChannelLayout(),
        **overrides,
    )
    config.validate()
    return config


def quantize_degree(degree: float, n_bins: int) -> int:
    """Map a degree in [0, 1) to its bin index."""
    if not 0.0 <= degree < 1.0:
        raise ValueError(f"degree must be in [0, 1), got {degree}")
    return min(n_bins - 1, int(math.floor(degree * n_bins + 1e-9)))


@dataclass(frozen=True)
class AttributeSlot:
    """Where one attribute lives inside the style channels.

    Attributes:
        attribute: Attribute name.
        style_channel: Index among the style channels.
        radix: Number of distinct digits of this attribute.
        stride: Mixed-radix place value inside the channel code.
    """

    attribute: str
    style_channel: int
    radix: int
    stride: int


class StyleCodeTable:
    """Invertible map between (labels, degrees) and style channel tokens.

    Attributes:
        slots: Attribute name to AttributeSlot.
        channel_attributes: Attributes carried by each style channel.
        capacity: Number of valid codes per style channel.
    """

    def __init__(self, config: DatasetConfig) -> None:
        self.categories = config.categories
        self.n_degree_bins = config.n_degree_bins
        n_style = config.layout.n_style
        self.channel_attributes: list[list[str]] = [[] for _ in range(n_style)]
        for index, name in enumerate(STYLE_ATTRIBUTES):
            self.channel_attributes[index % n_style].append(name)
        # Channels beyond the attribute count mirror an attribute.
        self.mirrors: dict[int, int] = {}
        for channel in range(len(STYLE_ATTRIBUTES), n_style):
            self.mirrors[channel] = channel % len(STYLE_ATTRIBUTES)

        self.slots: dict[str, AttributeSlot] = {}
        self.capacity: list[int] = []
        for channel, names in enumerate(self.channel_attributes):
            stride = 1
            for name in names:
                radix = self.radix(name)
                self.slots[name] = AttributeSlot(name, channel, radix, stride)
                stride *= radix
            self.capacity.append(stride if names else 0)
        for channel, source in self.mirrors.items():
            self.capacity[channel] = self.capacity[source]

        needed = 1 + max(self.capacity)
        if needed > config.layout.codebook_size:
            raise ValueError(
                f"codebook_size={config.layout.codebook_size} cannot hold {needed} style codes; "
                "use more style channels, fewer degree bins or a larger codebook"
            )

    def radix(self, attribute: str) -> int:
        size = len(self.categories.domain(attribute))
        return size if attribute == "gender" else size * self.n_degree_bins

    def digit(self, attribute: str, labels: AttributeLabels, degrees: Degrees) -> int:
        label_index = labels.index(attribute, self.categories)
        if attribute == "gender":
            return label_index
        return label_index * self.n_degree_bins + quantize_degree(
            degrees[attribute], self.n_degree_bins
        )

    def encode(self, labels: AttributeLabels, degrees: Degrees) -> list[int]:
        """Return the token of every style channel."""
        tokens = []
        for names in self.channel_attributes:
            code = sum(
                self.digit(name, labels, degrees) * self.slots[name].stride for name in names
            )
            tokens.append(1 + code)
        for channel, source in self.mirrors.items():
            tokens[channel] = tokens[source]
        return tokens

    def read_token(self, attribute: str, token: int) -> tuple[str, float | None] | None:
        """Decode one attribute from a style channel token.

        Returns:
            (label, degree) or None when the token is not a valid code.
            Degree is None for gender.
        """
        slot = self.slots[attribute]
        code = int(token) - 1
        if code < 0 or code >= self.capacity[slot.style_channel]:
            return None
        digit = (code // slot.stride) % slot.radix
        domain = self.categories.domain(attribute)
        if attribute == "gender":
            return domain[digit], None
        label = domain[digit // self.n_degree_bins]
        return label, (digit % self.n_degree_bins) / self.n_degree_bins

    def pattern_table(self) -> dict[str, Any]:
        """Describe the degree-pattern tables for the dataset manifest."""
        table: dict[str, Any] = {}
        for name in STYLE_ATTRIBUTES:
            slot = self.slots[name]
            table[name] = {
                "style_channel": slot.style_channel,
                "radix": slot.radix,
                "stride": slot.stride,
                "labels": list(self.categories.domain(name)),
                "degree_bins": 1 if name == "gender" else self.n_degree_bins,
            }
        return table


@dataclass(frozen=True, eq=False)
class SyntheticUtterance(Serializable):
    """One synthetic utterance with all of its paired views.

    Attributes:
        utterance_id: Identifier unique within a corpus.
        speaker_id: Speaker index.
        content_tokens: Phoneme id sequence.
        style_text: Style prompt words.
        template_id: Template that generated style_text, if any.
        labels: Generating attribute labels.
        degrees: Generating degrees of the graded attributes.
        durations: Frames per phoneme; sums to the codec length.
        codec: Codec token matrix.
        timbre: Unit-norm timbre vector.
    """

    utterance_id: str
    speaker_id: int
    content_tokens: tuple[int, ...]
    style_text: tuple[str, ...]
    template_id: int | None
    labels: AttributeLabels
    degrees: Degrees
    durations: tuple[int, ...]
    codec: CodecMatrix
    timbre: np.ndarray

    def serialize(self) -> dict[str, Any]:
        return {
            "utterance_id": self.utterance_id,
            "speaker_id": self.speaker_id,
            "content_tokens": list(self.content_tokens),
            "style_text": list(self.style_text),
            "template_id": self.template_id,
            "labels": self.labels.serialize(),
            "degrees": self.degrees.serialize(),
            "durations": list(self.durations),
            "codec": self.codec.tokens.tolist(),
            "timbre": [float(v) for v in self.timbre],
        }

    @classmethod
    def deserialize(cls, data: dict[str, Any], layout: ChannelLayout | None = None) -> SyntheticUtterance:
        if layout is None:
            raise ValueError("SyntheticUtterance.deserialize needs the corpus layout")
        return cls(
            utterance_id=str(data["utterance_id"]),
            speaker_id=int(data["speaker_id"]),
            content_tokens=tuple(int(v) for v in data["content_tokens"]),
            style_text=tuple(str(v) for v in data["style_text"]),
            template_id=None if data["template_id"] is None else int(data["template_id"]),
            labels=AttributeLabels.deserialize(data["labels"]),
            degrees=Degrees.deserialize(data["degrees"]),
            durations=tuple(int(v) for v in data["durations"]),
            codec=CodecMatrix(np.asarray(data["codec"], dtype=np.int64), layout),
            timbre=np.asarray(data["timbre"], dtype=np.float64),
        )


def default_prompt(labels: AttributeLabels, _rng: np.random.Generator) -> tuple[list[str], int | None]:
    """Plain keyword prompt used when no template bank is supplied."""
    return [
        labels.gender,
        f"{labels.pitch}-pitch",
        f"{labels.speed}-speed",
        f"{labels.energy}-energy",
        labels.emotion,
    ], None


class ToyCodec:
    """Synthetic codec bound to one DatasetConfig.

    Holds the derived fixed tables (style codes, base durations, speaker
    vectors, prompt projection) and implements generation and decoding.

    Attributes:
        config: Dataset configuration.
        layout: Channel layout shortcut.
        categories: Attribute category sets.
        style_codes: StyleCodeTable of the configuration.
    """

    def __init__(self, config: DatasetConfig) -> None:
        config.validate()
        self.config = config
        self.layout = config.layout
        self.categories = config.categories
        self.style_codes = StyleCodeTable(config)

        table_rng = np.random.default_rng(derive_seed(config.seed, "base_durations"))
        self.base_durations = table_rng.choice(
            np.asarray(config.base_durations), size=config.text_vocab
        )

        self._speaker_vectors = np.stack(
            [self._speaker_vector(speaker) for speaker in range(config.n_speakers)]
        )

        projection_rng = np.random.default_rng(derive_seed(config.seed, "prompt_projection"))
        self._prompt_projection = projection_rng.normal(
            size=(self.layout.codebook_size, config.d_timbre)
        ) / math.sqrt(config.d_timbre)

    # Speakers and timbre

    def _speaker_vector(self, speaker_id: int) -> np.ndarray:
        rng = np.random.default_rng(derive_seed(self.config.seed, "speaker", speaker_id))
        vector = rng.normal(size=self.config.d_timbre)
        return vector / np.linalg.norm(vector)

    def speaker_gender(self, speaker_id: int) -> str:
        self._check_speaker(speaker_id)
        return self.categories.gender[speaker_id % len(self.categories.gender)]

    def speaker_timbre(self, speaker_id: int, rng: np.random.Generator | None = None) -> np.ndarray:
        """Return a unit-norm timbre vector of a speaker.

        Args:
            speaker_id: Speaker index.
            rng: Source of the per-utterance jitter; None gives the jitter-free
                speaker centroid.
        """
        self._check_speaker(speaker_id)
        vector = self._speaker_vectors[speaker_id].copy()
        if rng is not None:
            jitter = self.config.timbre_jitter
            vector = vector + rng.uniform(-jitter, jitter, size=vector.shape)
        return vector / np.linalg.norm(vector)

    def _check_speaker(self, speaker_id: int) -> None:
        if not 0 <= speaker_id < self.config.n_speakers:
            raise ValueError(
                f"Unknown speaker id {speaker_id}; corpus has {self.config.n_speakers} speakers"
            )

    # Generation

    def sample_labels(self, rng: np.random.Generator, speaker_id: int) -> AttributeLabels:
        categories = self.categories
        return AttributeLabels(
            gender=self.speaker_gender(speaker_id),
            pitch=str(rng.choice(categories.pitch)),
            speed=str(rng.choice(categories.speed)),
            energy=str(rng.choice(categories.energy)),
            emotion=str(rng.choice(categories.emotion)),
        )

    def sample_degrees(self, rng: np.random.Generator) -> Degrees:
        n_bins = self.config.n_degree_bins
        values = {}
        for name in GRADED_ATTRIBUTES:
            values[name] = quantize_degree(float(rng.random()), n_bins) / n_bins
        return Degrees(values)

    def durations_for(
        self, content_tokens: np.ndarray, speed: str, rng: np.random.Generator
    ) -> np.ndarray:
        """Draw per-phoneme durations: base × speed multiplier × jitter, at least 1."""
        jitter = self.config.duration_jitter
        scale = self.config.speed_multipliers[speed] * rng.uniform(
            1.0 - jitter, 1.0 + jitter, size=len(content_tokens)
        )
        frames = np.rint(self.base_durations[content_tokens] * scale)
        return np.maximum(frames, 1).astype(np.int64)

    def encode(
        self,
        content_tokens: np.ndarray,
        durations: np.ndarray,
        labels: AttributeLabels,
        degrees: Degrees,
    ) -> CodecMatrix:
        """Build the codec matrix of a (content, durations, style) triple."""
        layout = self.layout
        content_tokens = np.asarray(content_tokens, dtype=np.int64)
        durations = np.asarray(durations, dtype=np.int64)
        n_frames = int(durations.sum())
        tokens = np.zeros((n_frames, layout.n_channels), dtype=np.int64)

        frame_phoneme = np.repeat(content_tokens, durations)
        starts = np.repeat(np.cumsum(durations) - durations, durations)
        offsets = np.arange(n_frames) - starts
        tokens[:, 0] = 1 + frame_phoneme
        for channel in range(1, layout.n_content):
            if channel == 1:
                tokens[:, channel] = 1 + np.minimum(offsets, layout.codebook_size - 2)
            else:
                tokens[:, channel] = 1 + frame_phoneme

        style_tokens = self.style_codes.encode(labels, degrees)
        tokens[:, layout.style_slice] = np.asarray(style_tokens, dtype=np.int64)[None, :]
        return CodecMatrix(tokens, layout)

    def synth_utterance(
        self,
        rng: np.random.Generator,
        speaker_id: int | None = None,
        labels: AttributeLabels | None = None,
        degrees: Degrees | None = None,
        content_tokens: np.ndarray | None = None,
        prompt_source: PromptSource | None = None,
        utterance_id: str = "",
    ) -> SyntheticUtterance:
        """Synthesize one utterance.

        Draws happen in a fixed order (speaker, labels, degrees, text,
        durations, timbre jitter, prompt), so a given rng state always yields
        the same utterance. Any of speaker, labels, degrees or text can be
        pinned; pinned values skip their draws.

        Args:
            rng: numpy Generator consumed by this call.
            speaker_id: Pinned speaker, drawn uniformly when None.
            labels: Pinned labels; gender follows the speaker when drawn.
            degrees: Pinned degrees of the graded attributes.
            content_tokens: Pinned phoneme ids.
            prompt_source: Producer of the style prompt words.
            utterance_id: Identifier stored on the utterance.

        Returns:
            SyntheticUtterance satisfying decode_attributes(codec) == labels.
        """
        config = self.config
        if speaker_id is None:
            speaker_id = int(rng.integers(config.n_speakers))
        if labels is None:
            labels = self.sample_labels(rng, speaker_id)
        labels.validate(self.categories)
        if degrees is None:
            degrees = self.sample_degrees(rng)
        else:
            n_bins = config.n_degree_bins
            degrees = Degrees(
                {name: quantize_degree(degrees[name], n_bins) / n_bins for name in GRADED_ATTRIBUTES}
            )
        if content_tokens is None:
            length = int(rng.integers(config.min_text_len, config.max_text_len + 1))
            content_tokens = rng.integers(config.text_vocab, size=length)
        content_tokens = np.asarray(content_tokens, dtype=np.int64)
        if content_tokens.size == 0:
            raise ValueError("content_tokens must not be empty")
        if content_tokens.min() < 0 or content_tokens.max() >= config.text_vocab:
            raise ValueError(f"content token ids must lie in [0, {config.text_vocab})")

        durations = self.durations_for(content_tokens, labels.speed, rng)
        codec = self.encode(content_tokens, durations, labels, degrees)
        timbre = self.speaker_timbre(speaker_id, rng)
        words, template_id = (prompt_source or default_prompt)(labels, rng)

        return SyntheticUtterance(
            utterance_id=utterance_id,
            speaker_id=speaker_id,
            content_tokens=tuple(int(v) for v in content_tokens),
            style_text=tuple(words),
            template_id=template_id,
            labels=labels,
            degrees=degrees,
            durations=tuple(int(v) for v in durations),
            codec=codec,
            timbre=timbre,
        )

    def render_prompt_frames(self, utterance: SyntheticUtterance) -> np.ndarray:
        """Toy speech-encoder output of an utterance, used as timbre prompt.

        Each frame is the utterance's timbre plus a fixed projection of the
        frame's phoneme token, so timbre has to be pooled out of
        content-dependent frames.

        Returns:
            Array of shape (T, d_timbre).
        """
        phoneme_tokens = utterance.codec.channel(0)
        content_part = self._prompt_projection[phoneme_tokens]
        return utterance.timbre[None, :] + self.config.prompt_content_scale * content_part

    # Decoding

    def _style_column(self, codec: CodecMatrix, attribute: str) -> np.ndarray:
        slot = self.style_codes.slots[attribute]
        return codec.tokens[:, self.layout.n_content + slot.style_channel]

    def _check_layout(self, codec: CodecMatrix) -> None:
        if codec.layout != self.layout:
            raise ValueError(f"codec layout {codec.layout} does not match {self.layout}")

    def decode_attributes(self, codec: CodecMatrix) -> tuple[AttributeLabels, Degrees]:
        """Exact inverse of the labels-to-pattern map.

        Every frame of every style channel must carry the same valid code.

        Args:
            codec: Codec generated with this codec's layout.

        Returns:
            (labels, degrees) that generated the codec.

        Raises:
            UnknownPatternError: If a style channel holds an invalid or
                inconsistent pattern.
        """
        self._check_layout(codec)
        if codec.n_frames == 0:
            raise UnknownPatternError("codec has no frames")
        labels: dict[str, str] = {}
        degrees: dict[str, float] = {}
        for name in STYLE_ATTRIBUTES:
            column = self._style_column(codec, name)
            if not np.all(column == column[0]):
                raise UnknownPatternError(f"{name} channel is not a constant pattern")
            reading = self.style_codes.read_token(name, int(column[0]))
            if reading is None:
                raise UnknownPatternError(f"token {int(column[0])} is not a valid {name} pattern")
            labels[name], degree = reading
            if degree is not None:
                degrees[name] = degree
        return AttributeLabels(**labels), Degrees(degrees)

    def read_attributes(self, codec: CodecMatrix) -> dict[str, tuple[str, float | None] | None]:
        """Lenient decoder for generated codecs.

        Each attribute takes the majority (label, degree) over the frames whose
        token is a valid code; attributes without any valid token read as None.

        Returns:
            Attribute name to (label, degree) or None.
        """
        self._check_layout(codec)
        readings: dict[str, tuple[str, float | None] | None] = {}
        for name in STYLE_ATTRIBUTES:
            votes: Counter[tuple[str, float | None]] = Counter()
            for token in self._style_column(codec, name):
                reading = self.style_codes.read_token(name, int(token))
                if reading is not None:
                    votes[reading] += 1
            readings[name] = votes.most_common(1)[0][0] if votes else None
        return readings

    def decode_content(self, codec: CodecMatrix, strict: bool = True) -> tuple[list[int], list[int]]:
        """Recover phoneme ids and durations from the content channels.

        A new phoneme starts at every frame whose offset token is 1 (offset 0);
        with a single content channel, at every change of phoneme token.

        Args:
            codec: Codec matrix.
            strict: Raise on any invalid token instead of reading it as -1.

        Returns:
            (phoneme ids, durations).

        Raises:
            UnknownPatternError: In strict mode, on invalid content tokens.
        """
        self._check_layout(codec)
        phonemes = codec.channel(0) - 1
        if self.layout.n_content >= 2:
            starts = np.flatnonzero(codec.channel(1) == 1)
        else:
            starts = np.flatnonzero(np.r_[True, phonemes[1:] != phonemes[:-1]])
        if codec.n_frames and (starts.size == 0 or starts[0] != 0):
            if strict:
                raise UnknownPatternError("content channels do not start a phoneme at frame 0")
            starts = np.r_[0, starts]
        bounds = np.r_[starts, codec.n_frames]
        content: list[int] = []
        durations: list[int] = []
        for begin, end in zip(bounds[:-1], bounds[1:], strict=True):
            run = phonemes[begin:end]
            valid = run[(run >= 0) & (run < self.config.text_vocab)]
            if strict and (valid.size != run.size or np.any(run != run[0])):
                raise UnknownPatternError(f"inconsistent phoneme run at frames {begin}:{end}")
            if strict and self.layout.n_content >= 2:
                expected = 1 + np.minimum(np.arange(end - begin), self.layout.codebook_size - 2)
                if not np.array_equal(codec.channel(1)[begin:end], expected):
                    raise UnknownPatternError(f"offset channel broken at frames {begin}:{end}")
            content.append(int(Counter(valid.tolist()).most_common(1)[0][0]) if valid.size else -1)
            durations.append(int(end - begin))
        return content, durations

    def manifest_tables(self) -> dict[str, Any]:
        """Fixed tables recorded in the dataset manifest."""
        return {
            "style_patterns": self.style_codes.pattern_table(),
            "base_durations": [int(v) for v in self.base_durations],
            "speaker_genders": [self.speaker_gender(s) for s in range(self.config.n_speakers)],
        }

    def with_config(self, **changes: Any) -> ToyCodec:
        """Return a codec for a modified copy of the configuration."""
        return ToyCodec(replace(self.config, **changes))
