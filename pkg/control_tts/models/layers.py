"""Shared building blocks: positional encodings and attention blocks.

Author:
    Michael Economou

Date:
    2026-10-17
"""

from __future__ import annotations

import math

import torch
from torch import nn


class SinusoidalPositionalEncoding(nn.Module):
    """Fixed sinusoidal position table added to a (B, L, d) sequence."""

    def __init__(self, d_model: int, max_len: int = 512) -> None:
        super().__init__()
        position = torch.arange(max_len, dtype=torch.float32).unsqueeze(1)
        div = torch.exp(torch.arange(0, d_model, 2, dtype=torch.float32) * (-math.log(10000.0) / d_model))
        table = torch.zeros(max_len, d_model)
        table[:, 0::2] = torch.sin(position * div)
        table[:, 1::2] = torch.cos(position * div[: d_model // 2])
        self.register_buffer("table", table, persistent=False)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        length = x.shape[1]
        if length > self.table.shape[0]:
            raise ValueError(f"sequence length {length} exceeds {self.table.shape[0]} positions")
        return x + self.table[:length].to(dtype=x.dtype)


class FFTBlock(nn.Module):
    """Self-attention followed by a convolutional feedforward, post-norm.

    Padded positions (mask False) are excluded as attention keys and zeroed
    at the block output.
    """

    def __init__(
        self,
        d_model: int,
        n_heads: int,
        d_ff: int,
        kernel_size: int = 3,
        dropout: float = 0.0,
    ) -> None:
        super().__init__()
        self.attention = nn.MultiheadAttention(d_model, n_heads, dropout=dropout, batch_first=True)
        self.attention_norm = nn.LayerNorm(d_model)
        self.conv_in = nn.Conv1d(d_model, d_ff, kernel_size, padding=kernel_size // 2)
        self.conv_out = nn.Conv1d(d_ff, d_model, 1)
        self.ff_norm = nn.LayerNorm(d_model)
        self.dropout = nn.Dropout(dropout)

    def forward(self, x: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
        """Args:
        x: Sequence of shape (B, L, d).
        mask: Bool validity mask of shape (B, L).
        """
        keep = mask.unsqueeze(-1).to(x.dtype)
        attended, _ = self.attention(x, x, x, key_padding_mask=~mask, need_weights=False)
        x = self.attention_norm(x + self.dropout(attended)) * keep

        h = torch.relu(self.conv_in(x.transpose(1, 2)))
        h = self.conv_out(h).transpose(1, 2)
        return self.ff_norm(x + self.dropout(h)) * keep


class BlockStack(nn.Module):
    """Sequence of FFT blocks sharing one mask."""

    def __init__(
        self, n_blocks: int, d_model: int, n_heads: int, d_ff: int, kernel_size: int, dropout: float
    ) -> None:
        super().__init__()
        self.blocks = nn.ModuleList(
            FFTBlock(d_model, n_heads, d_ff, kernel_size, dropout) for _ in range(n_blocks)
        )

    def forward(self, x: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
        for block in self.blocks:
            x = block(x, mask)
        return x


def masked_mean(x: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
    """Mean of (B, L, d) over valid positions, shape (B, d)."""
    weights = mask.unsqueeze(-1).to(x.dtype)
    return (x * weights).sum(dim=1) / weights.sum(dim=1).clamp_min(1.0)


def lengths_to_mask(lengths: torch.Tensor, max_len: int | None = None) -> torch.Tensor:
    """Bool mask (B, max_len) with True on the first lengths[b] positions."""
    max_len = int(lengths.max()) if max_len is None else max_len
    return torch.arange(max_len, device=lengths.device).unsqueeze(0) < lengths.unsqueeze(1)
