"""Channel layout and codec token matrices.

A codec matrix holds T frames by N channels of discrete tokens. The channels
are partitioned into three disjoint, ordered groups: content, prosody and
acoustic. The prosody and acoustic groups together form the style codec;
timbre is never stored in the matrix.

Author:
    Michael Economou

Date:
    2026-10-17
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from control_tts.core.serializable import Serializable


@dataclass(frozen=True)
class ChannelLayout(Serializable):
    """Partition of codec channels into content, prosody and acoustic groups.

    Attributes:
        n_content: Number of content channels.
        n_prosody: Number of prosody channels.
        n_acoustic: Number of acoustic-detail channels.
        codebook_size: Shared codebook size of every channel.
    """

    n_content: int = 2
    n_prosody: int = 1
    n_acoustic: int = 3
    codebook_size: int = 64

    def __post_init__(self) -> None:
        if self.n_content < 0 or self.n_prosody < 0 or self.n_acoustic < 0:
            raise ValueError(f"Channel counts must be non-negative: {self}")
        if self.n_channels == 0:
            raise ValueError("Layout must have at least one channel")
        if self.codebook_size < 2:
            raise ValueError(f"codebook_size must be >= 2, got {self.codebook_size}")

    @property
    def n_channels(self) -> int:
        return self.n_content + self.n_prosody + self.n_acoustic

    @property
    def n_style(self) -> int:
        return self.n_prosody + self.n_acoustic

    @property
    def content_slice(self) -> slice:
        return slice(0, self.n_content)

    @property
    def prosody_slice(self) -> slice:
        return slice(self.n_content, self.n_content + self.n_prosody)

    @property
    def acoustic_slice(self) -> slice:
        return slice(self.n_content + self.n_prosody, self.n_channels)

    @property
    def style_slice(self) -> slice:
        return slice(self.n_content, self.n_channels)

    def serialize(self) -> dict[str, Any]:
        return {
            "n_content": self.n_content,
            "n_prosody": self.n_prosody,
            "n_acoustic": self.n_acoustic,
            "codebook_size": self.codebook_size,
        }

    @classmethod
    def deserialize(cls, data: dict[str, Any]) -> ChannelLayout:
        return cls(
            n_content=int(data["n_content"]),
            n_prosody=int(data["n_prosody"]),
            n_acoustic=int(data["n_acoustic"]),
            codebook_size=int(data["codebook_size"]),
        )


@dataclass(frozen=True, eq=False)
class CodecMatrix:
    """T×N grid of codec tokens.

    Row t holds the N codes of frame t; column i is the token sequence of
    channel i.

    Attributes:
        tokens: Integer array of shape (T, N).
        layout: Channel layout the tokens follow.
    """

    tokens: np.ndarray
    layout: ChannelLayout

    def __post_init__(self) -> None:
        tokens = np.asarray(self.tokens, dtype=np.int64)
        if tokens.ndim != 2 or tokens.shape[1] != self.layout.n_channels:
            raise ValueError(
                f"tokens must have shape (T, {self.layout.n_channels}), got {tokens.shape}"
            )
        if tokens.size and (tokens.min() < 0 or tokens.max() >= self.layout.codebook_size):
            raise ValueError(f"tokens must lie in [0, {self.layout.codebook_size})")
        object.__setattr__(self, "tokens", tokens)

    @property
    def n_frames(self) -> int:
        return int(self.tokens.shape[0])

    def channel(self, index: int) -> np.ndarray:
        """Return the token sequence of one channel."""
        return self.tokens[:, index]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CodecMatrix):
            return NotImplemented
        return self.layout == other.layout and np.array_equal(self.tokens, other.tokens)

    def __hash__(self) -> int:
        return hash((self.layout, self.tokens.tobytes()))


def split_style(codec: CodecMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Split a codec into its content channels and its style channels.

    The style channels are the channel-dimension concatenation of the prosody
    channels followed by the acoustic channels.

    Args:
        codec: Codec matrix to split.

    Returns:
        (content_channels of shape T×n_content, style_channels of shape T×n_style).
    """
    layout = codec.layout
    content = codec.tokens[:, layout.content_slice]
    style = np.concatenate(
        [codec.tokens[:, layout.prosody_slice], codec.tokens[:, layout.acoustic_slice]], axis=1
    )
    return content.copy(), style


def join_style(
    content_channels: np.ndarray, style_channels: np.ndarray, layout: ChannelLayout
) -> CodecMatrix:
    """Concatenate content and style channels back into a codec matrix.

    Inverse of split_style.
    """
    return CodecMatrix(np.concatenate([content_channels, style_channels], axis=1), layout)
