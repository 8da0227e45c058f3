"""Keyword style-text encoder.

Encodes a tokenized style prompt into the global style semantic vector
consumed by the mixture head: word embeddings, a learned softplus gate per
word, gate-weighted mean pooling and a two-layer projection. Padding ids
(0) never contribute; a prompt of only <oov> words pools to the <oov>
embedding.

Author:
    Michael Economou

Date:
    2026-10-17
"""

from __future__ import annotations

import torch
import torch.nn.functional as F
from torch import nn


class StyleTextEncoder(nn.Module):
    """Learned pooling over keyword embeddings.

    Args:
        vocab_size: Prompt vocabulary size, <pad> at id 0.
        d_out: Output dimension (the mixture head input dimension).
        d_embed: Word embedding width.
    """

    def __init__(self, vocab_size: int, d_out: int, d_embed: int = 64) -> None:
        super().__init__()
        self.vocab_size = vocab_size
        self.d_out = d_out
        self.embedding = nn.Embedding(vocab_size, d_embed, padding_idx=0)
        self.gate = nn.Linear(d_embed, 1)
        self.projection = nn.Sequential(
            nn.Linear(d_embed, d_embed), nn.GELU(), nn.Linear(d_embed, d_out)
        )

    def forward(self, prompt_ids: torch.Tensor) -> torch.Tensor:
        """Encode a batch of padded prompts.

        Args:
            prompt_ids: Long tensor of shape (B, P), 0 marks padding.

        Returns:
            Style semantic vectors of shape (B, d_out).

        Raises:
            ValueError: If a prompt is empty or an id is out of range.
        """
        if prompt_ids.ndim != 2:
            raise ValueError(f"prompt ids must have shape (B, P), got {tuple(prompt_ids.shape)}")
        mask = prompt_ids != 0
        if prompt_ids.shape[1] == 0 or not bool(mask.any(dim=1).all()):
            raise ValueError("style prompt must contain at least one token")
        if int(prompt_ids.max()) >= self.vocab_size or int(prompt_ids.min()) < 0:
            raise ValueError(f"prompt ids must lie in [0, {self.vocab_size})")
        embedded = self.embedding(prompt_ids)
        weights = F.softplus(self.gate(embedded)).squeeze(-1) * mask.to(embedded.dtype)
        pooled = (weights.unsqueeze(-1) * embedded).sum(dim=1) / weights.sum(dim=1, keepdim=True).clamp_min(1e-6)
        return self.projection(pooled)
