"""Timbre extraction and conditional-normalization fusion.

The codec stage is the toy stand-in for the pretrained codec's timbre path:
a timbre extractor turns speech-prompt frames into a unit vector, and a toy
codec decoder embeds a generated codec, normalizes it over time, modulates
it with scale and shift vectors linearly derived from the timbre, and reads
a timbre vector back out. The fused path emits no tokens: attributes, content
and durations are read from the generated tokens before fusion, and the same
tokens are what the fused decoder consumes, so timbre can never change them.

Key Responsibilities:
    - TimbreExtractor (timbre_extract)
    - ConditionalNorm (cond_norm), with the variance-denominator variant
    - CodecStage training losses and assemble_output

Author:
    Michael Economou

Date:
    2026-10-17
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn

from control_tts.core.codec import ToyCodec
from control_tts.core.layout import ChannelLayout, CodecMatrix
from control_tts.models.layers import BlockStack, masked_mean

logger = logging.getLogger(__name__)


@dataclass
class FusionConfig:
    """Codec stage settings.

    Attributes:
        d_hidden: Width of the extractor and the toy decoder.
        n_heads: Attention heads of the extractor.
        n_blocks: Extractor blocks.
        eps_norm: Normalization stabilizer.
        variance_norm: Divide by the variance instead of the standard deviation.
        learning_rate: Learning rate of the codec stage optimizer.
    """

    d_hidden: int = 64
    n_heads: int = 4
    n_blocks: int = 2
    eps_norm: float = 1e-5
    variance_norm: bool = False
    learning_rate: float = 1e-3

    def validate(self) -> None:
        if self.d_hidden % self.n_heads:
            raise ValueError("d_hidden must be divisible by n_heads")
        if self.eps_norm <= 0.0 or self.learning_rate < 0.0:
            raise ValueError("eps_norm must be positive and learning_rate non-negative")


class TimbreExtractor(nn.Module):
    """Attention encoder over prompt frames, mean pooled and unit normalized."""

    def __init__(self, d_timbre: int, config: FusionConfig) -> None:
        super().__init__()
        self.input = nn.Linear(d_timbre, config.d_hidden)
        self.blocks = BlockStack(
            config.n_blocks, config.d_hidden, config.n_heads, 2 * config.d_hidden, 3, 0.0
        )
        self.output = nn.Linear(config.d_hidden, d_timbre)

    def forward(self, prompt_frames: torch.Tensor, prompt_mask: torch.Tensor) -> torch.Tensor:
        """Args:
        prompt_frames: Speech prompt (B, T, d_t).
        prompt_mask: Bool validity mask (B, T).

        Returns:
            Unit-norm timbre embeddings (B, d_t).

        Raises:
            ValueError: If a prompt has no frames.
        """
        if prompt_frames.shape[1] == 0 or not bool(prompt_mask.any(dim=1).all()):
            raise ValueError("speech prompt must have at least one frame")
        h = self.blocks(self.input(prompt_frames), prompt_mask)
        return F.normalize(self.output(masked_mean(h, prompt_mask)), dim=-1)


class ConditionalNorm(nn.Module):
    """Time-axis normalization modulated by timbre.

    out = W_gamma(t) * (h - mean_t) / sqrt(var_t + eps) + W_beta(t)

    With ``variance_norm`` the denominator is ``var_t + eps``. W_gamma starts
    as the constant 1 and W_beta as 0, so an untrained layer is a plain
    normalization.
    """

    def __init__(self, d_timbre: int, d_hidden: int, eps: float = 1e-5, variance_norm: bool = False) -> None:
        super().__init__()
        self.eps = eps
        self.variance_norm = variance_norm
        self.w_gamma = nn.Linear(d_timbre, d_hidden)
        self.w_beta = nn.Linear(d_timbre, d_hidden)
        nn.init.zeros_(self.w_gamma.weight)
        nn.init.ones_(self.w_gamma.bias)
        nn.init.zeros_(self.w_beta.weight)
        nn.init.zeros_(self.w_beta.bias)

    def normalize(self, hidden: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
        """Per-feature normalization over valid frames, zero at padding."""
        weights = mask.unsqueeze(-1).to(hidden.dtype)
        count = weights.sum(dim=1, keepdim=True).clamp_min(1.0)
        mean = (hidden * weights).sum(dim=1, keepdim=True) / count
        var = ((hidden - mean).pow(2) * weights).sum(dim=1, keepdim=True) / count
        denom = var + self.eps if self.variance_norm else torch.sqrt(var + self.eps)
        return (hidden - mean) / denom * weights

    def forward(self, hidden: torch.Tensor, timbre: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
        """Args:
        hidden: Frame states (B, T, d_h).
        timbre: Timbre embeddings (B, d_t).
        mask: Bool validity mask (B, T).
        """
        gamma = self.w_gamma(timbre).unsqueeze(1)
        beta = self.w_beta(timbre).unsqueeze(1)
        weights = mask.unsqueeze(-1).to(hidden.dtype)
        return (gamma * self.normalize(hidden, mask) + beta) * weights


class CodecStage(nn.Module):
    """Timbre extractor plus the toy codec decoder with its timbre readout."""

    def __init__(self, layout: ChannelLayout, d_timbre: int, config: FusionConfig | None = None) -> None:
        super().__init__()
        self.config = config or FusionConfig()
        self.config.validate()
        d = self.config.d_hidden
        self.layout = layout
        self.timbre_extractor = TimbreExtractor(d_timbre, self.config)
        self.token_embeddings = nn.ModuleList(
            nn.Embedding(layout.codebook_size, d) for _ in range(layout.n_channels)
        )
        self.cond_norm = ConditionalNorm(d_timbre, d, self.config.eps_norm, self.config.variance_norm)
        self.decoder = nn.Sequential(nn.Linear(d, 2 * d), nn.GELU(), nn.Linear(2 * d, d))
        self.readout = nn.Linear(d, d_timbre)

    def embed(self, tokens: torch.Tensor) -> torch.Tensor:
        return torch.stack(
            [emb(tokens[..., c]) for c, emb in enumerate(self.token_embeddings)], dim=0
        ).sum(dim=0)

    def timbre_readout(
        self, tokens: torch.Tensor, frame_mask: torch.Tensor, timbre: torch.Tensor
    ) -> torch.Tensor:
        """Decode a timbre vector from codec tokens fused with timbre, shape (B, d_t)."""
        h = self.cond_norm(self.embed(tokens), timbre, frame_mask)
        h = h + self.decoder(h)
        return self.readout(masked_mean(h, frame_mask))

    def losses(
        self,
        tokens: torch.Tensor,
        frame_mask: torch.Tensor,
        timbre: torch.Tensor,
        prompt_frames: torch.Tensor,
        prompt_mask: torch.Tensor,
    ) -> dict[str, torch.Tensor]:
        """Cosine losses of the extractor and of the readout against the true timbre."""
        extracted = self.timbre_extractor(prompt_frames, prompt_mask)
        readout = self.timbre_readout(tokens, frame_mask, timbre)
        return {
            "timbre_extract": (1.0 - F.cosine_similarity(extracted, timbre, dim=-1)).mean(),
            "timbre_readout": (1.0 - F.cosine_similarity(readout, timbre, dim=-1)).mean(),
        }


@dataclass
class FinalUtterance:
    """Decoded output of one synthesized codec.

    Attributes:
        attributes: Attribute name to (label, degree) or None when unreadable.
        content_tokens: Decoded phoneme ids.
        durations: Decoded frames per phoneme.
        timbre_readout: Timbre vector read from the fused codec.
        readout_cosine: Cosine between the readout and the input timbre.
    """

    attributes: dict[str, tuple[str, float | None] | None]
    content_tokens: list[int]
    durations: list[int]
    timbre_readout: np.ndarray
    readout_cosine: float

    def serialize(self) -> dict[str, Any]:
        return {
            "attributes": {
                name: None if value is None else {"label": value[0], "degree": value[1]}
                for name, value in self.attributes.items()
            },
            "content_tokens": self.content_tokens,
            "durations": self.durations,
            "timbre_readout": [float(v) for v in self.timbre_readout],
            "readout_cosine": self.readout_cosine,
        }


def check_timbre(timbre: np.ndarray, tol: float = 1e-3) -> None:
    """Reject non-finite or non-unit timbre vectors.

    Raises:
        ValueError: If the vector is not finite or its norm differs from 1.
    """
    if not np.all(np.isfinite(timbre)):
        raise ValueError("timbre vector must be finite")
    norm = float(np.linalg.norm(timbre))
    if abs(norm - 1.0) > tol:
        raise ValueError(f"timbre vector must have unit norm, got {norm:.6f}")


@torch.no_grad()
def assemble_output(
    stage: CodecStage, toy_codec: ToyCodec, codec: CodecMatrix, timbre: np.ndarray
) -> FinalUtterance:
    """Fuse timbre into a generated codec and decode it.

    Attributes, content and durations are read from the generated tokens,
    which are also the only token input of the fused decoder.

    Args:
        stage: Trained codec stage.
        toy_codec: Codec that owns the token layout.
        codec: Generated codec matrix.
        timbre: Unit-norm timbre vector.

    Returns:
        FinalUtterance with attribute, content and timbre readouts.

    Raises:
        ValueError: If timbre is not a finite unit vector.
    """
    check_timbre(timbre)
    param = next(stage.parameters())
    tokens = torch.as_tensor(codec.tokens, dtype=torch.long, device=param.device).unsqueeze(0)
    mask = torch.ones(tokens.shape[:2], dtype=torch.bool, device=param.device)
    t = torch.as_tensor(timbre, dtype=param.dtype, device=param.device).unsqueeze(0)
    readout = stage.timbre_readout(tokens, mask, t)
    cosine = float(F.cosine_similarity(readout, t, dim=-1)[0])
    content, durations = toy_codec.decode_content(codec, strict=False)
    return FinalUtterance(
        attributes=toy_codec.read_attributes(codec),
        content_tokens=content,
        durations=durations,
        timbre_readout=readout[0].cpu().double().numpy(),
        readout_cosine=cosine,
    )
