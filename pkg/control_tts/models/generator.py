"""Codec generation stack.

Text encoding, cross-attention style fusion, duration prediction, length
regulation and the masked parallel codec generator together with its
training mask sampler and the confidence-based iterative decoder.

Training (one channel i per batch element):
    input_t = X_t + pos_t + chan_i + sum_{c<i} E_c(C_tc) + (MASK_i if masked else E_i(C_ti))
    L_codec = cross-entropy over the masked positions of channel i only

Inference decodes channels 0..N-1 in order. Each channel starts fully
masked; iteration j samples every masked position at temperature
tau_j = tau_0 * (1 - (j + 1) / J) (argmax at 0) and commits the most
confident candidates until T - floor(T * cos(pi/2 * (j + 1) / J)) positions
are committed.

Author:
    Michael Economou

Date:
    2026-10-17
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import torch
import torch.nn.functional as F
from torch import nn

from control_tts.core.layout import ChannelLayout
from control_tts.models.layers import BlockStack, SinusoidalPositionalEncoding, lengths_to_mask

logger = logging.getLogger(__name__)

CONFIDENCE_MODES: tuple[str, ...] = ("sampled", "max")


@dataclass
class GeneratorConfig:
    """Text encoder and codec decoder sizes.

    Attributes:
        d_hidden: Model width d_h.
        n_heads: Attention heads.
        d_ff: Convolutional feedforward width.
        kernel_size: Feedforward convolution kernel.
        n_text_blocks: Text encoder blocks.
        n_decoder_blocks: Codec decoder blocks.
        max_positions: Learned decoder positions, bounds T.
        dropout: Dropout probability.
        duration_channels: Duration predictor width.
    """

    d_hidden: int = 128
    n_heads: int = 4
    d_ff: int = 256
    kernel_size: int = 3
    n_text_blocks: int = 2
    n_decoder_blocks: int = 4
    max_positions: int = 256
    dropout: float = 0.0
    duration_channels: int = 128

    def validate(self) -> None:
        if self.d_hidden % self.n_heads:
            raise ValueError(f"d_hidden={self.d_hidden} must be divisible by n_heads={self.n_heads}")
        for name in ("d_hidden", "d_ff", "n_text_blocks", "n_decoder_blocks", "max_positions"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must be in [0, 1)")


@dataclass
class DecodeConfig:
    """Iterative decoding settings.

    Attributes:
        iterations_first: Iterations for channel 0.
        iterations_rest: Iterations for every other channel.
        initial_temperature: Sampling temperature of the first iteration.
        confidence: "sampled" (probability of the sampled token) or "max".
    """

    iterations_first: int = 8
    iterations_rest: int = 4
    initial_temperature: float = 1.0
    confidence: str = "sampled"

    def validate(self) -> None:
        if self.iterations_first < 1 or self.iterations_rest < 1:
            raise ValueError("decode schedules need at least one iteration per channel")
        if self.initial_temperature < 0.0:
            raise ValueError("initial_temperature must be non-negative")
        if self.confidence not in CONFIDENCE_MODES:
            raise ValueError(f"confidence must be one of {CONFIDENCE_MODES}")


# Text side


class TextEncoder(nn.Module):
    """Phoneme embedding, sinusoidal positions and FFT blocks."""

    def __init__(self, text_vocab: int, config: GeneratorConfig) -> None:
        super().__init__()
        self.text_vocab = text_vocab
        # Id 0 is padding; phoneme p is stored as p + 1.
        self.embedding = nn.Embedding(text_vocab + 1, config.d_hidden, padding_idx=0)
        self.positions = SinusoidalPositionalEncoding(config.d_hidden, config.max_positions)
        self.blocks = BlockStack(
            config.n_text_blocks,
            config.d_hidden,
            config.n_heads,
            config.d_ff,
            config.kernel_size,
            config.dropout,
        )

    def forward(self, text_ids: torch.Tensor, text_mask: torch.Tensor) -> torch.Tensor:
        """Encode padded phoneme ids (shifted by one) of shape (B, L).

        Raises:
            ValueError: On an empty sequence or an id outside the vocabulary.
        """
        if text_ids.shape[1] == 0 or not bool(text_mask.any(dim=1).all()):
            raise ValueError("text sequence must not be empty")
        valid = text_ids[text_mask]
        if int(valid.min()) < 1 or int(valid.max()) > self.text_vocab:
            raise ValueError(f"phoneme ids must lie in [0, {self.text_vocab})")
        x = self.positions(self.embedding(text_ids))
        return self.blocks(x, text_mask)


class StyleFusion(nn.Module):
    """Cross-attention from text states to a style memory, with residual.

    The style vector forms a single-element key/value memory; queries come
    from the layer-normalized text states.
    """

    def __init__(self, d_hidden: int, d_style: int, n_heads: int) -> None:
        super().__init__()
        self.n_heads = n_heads
        self.d_head = d_hidden // n_heads
        self.query_norm = nn.LayerNorm(d_hidden)
        self.query = nn.Linear(d_hidden, d_hidden)
        self.key = nn.Linear(d_style, d_hidden)
        self.value = nn.Linear(d_style, d_hidden)
        self.out = nn.Linear(d_hidden, d_hidden, bias=False)

    def forward(self, hidden: torch.Tensor, memory: torch.Tensor) -> torch.Tensor:
        """Args:
        hidden: Text states (B, L, d_h).
        memory: Style memory (B, M, d_s); a style vector is passed as M = 1.
        """
        batch, length, _ = hidden.shape
        q = self.query(self.query_norm(hidden)).view(batch, length, self.n_heads, self.d_head)
        k = self.key(memory).view(batch, -1, self.n_heads, self.d_head)
        v = self.value(memory).view(batch, -1, self.n_heads, self.d_head)
        scores = torch.einsum("blhd,bmhd->bhlm", q, k) / math.sqrt(self.d_head)
        attended = torch.einsum("bhlm,bmhd->blhd", scores.softmax(dim=-1), v)
        return hidden + self.out(attended.reshape(batch, length, -1))


class DurationPredictor(nn.Module):
    """Convolutional log-duration regressor."""

    def __init__(self, d_hidden: int, channels: int, kernel_size: int = 3) -> None:
        super().__init__()
        self.conv1 = nn.Conv1d(d_hidden, channels, kernel_size, padding=kernel_size // 2)
        self.norm1 = nn.LayerNorm(channels)
        self.conv2 = nn.Conv1d(channels, channels, kernel_size, padding=kernel_size // 2)
        self.norm2 = nn.LayerNorm(channels)
        self.linear = nn.Linear(channels, 1)

    def forward(self, hidden: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
        """Predicted log-durations of shape (B, L), zero at padding."""
        h = self.norm1(torch.relu(self.conv1(hidden.transpose(1, 2))).transpose(1, 2))
        h = self.norm2(torch.relu(self.conv2(h.transpose(1, 2))).transpose(1, 2))
        return self.linear(h).squeeze(-1) * mask.to(h.dtype)


def duration_loss(log_pred: torch.Tensor, durations: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
    """Mean squared error in the log domain over valid phonemes."""
    target = torch.log(durations.clamp_min(1).to(log_pred.dtype))
    sq = (log_pred - target).pow(2) * mask.to(log_pred.dtype)
    return sq.sum() / mask.sum().clamp_min(1)


def durations_from_log(log_pred: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
    """Round exp(prediction) to integer frames, at least 1, 0 at padding."""
    frames = torch.clamp(torch.round(log_pred.exp()), min=1).long()
    return frames * mask.long()


def length_regulate(
    hidden: torch.Tensor, durations: torch.Tensor
) -> tuple[torch.Tensor, torch.Tensor]:
    """Repeat each phoneme state by its duration.

    Args:
        hidden: Phoneme states (B, L, d).
        durations: Integer frames per phoneme (B, L); 0 at padding.

    Returns:
        (frames of shape (B, T_max, d), frame mask of shape (B, T_max)) with
        T_b = sum(durations[b]).

    Raises:
        ValueError: If a valid duration is negative.
    """
    if bool((durations < 0).any()):
        raise ValueError("durations must be non-negative integers")
    lengths = durations.sum(dim=1)
    max_len = max(int(lengths.max()), 1)
    frames = hidden.new_zeros((hidden.shape[0], max_len, hidden.shape[2]))
    for b in range(hidden.shape[0]):
        repeated = torch.repeat_interleave(hidden[b], durations[b], dim=0)
        frames[b, : repeated.shape[0]] = repeated
    return frames, lengths_to_mask(lengths, max_len)


def mean_pool_frames(frames: torch.Tensor, durations: torch.Tensor) -> torch.Tensor:
    """Average frames back to phonemes; inverse of length_regulate."""
    batch, n_phonemes = durations.shape
    pooled = frames.new_zeros((batch, n_phonemes, frames.shape[2]))
    for b in range(batch):
        start = 0
        for p in range(n_phonemes):
            length = int(durations[b, p])
            if length > 0:
                pooled[b, p] = frames[b, start : start + length].mean(dim=0)
            start += length
    return pooled


# Training masks


@dataclass
class MaskPlan:
    """Mask of one channel of one utterance.

    Attributes:
        channel: Channel index i.
        mask: Bool vector of length T, True where the token is masked.
        ratio: Masking probability p = cos(u').
    """

    channel: int
    mask: torch.Tensor
    ratio: float

    @property
    def complement(self) -> torch.Tensor:
        return ~self.mask


def mask_ratio(u: torch.Tensor) -> torch.Tensor:
    """p = cos(u'), with values below 1e-12 snapped to 0 so u' = pi/2 masks nothing."""
    p = torch.cos(u)
    return torch.where(p < 1e-12, torch.zeros_like(p), p)


def sample_mask_ratios(count: int, generator: torch.Generator | None = None) -> torch.Tensor:
    """Draw count masking ratios p = cos(u'), u' ~ Uniform[0, pi/2]."""
    u = torch.rand(count, generator=generator, dtype=torch.float64) * (math.pi / 2)
    return mask_ratio(u)


def sample_mask(
    generator: torch.Generator | None,
    n_frames: int,
    channel: int,
    u: float | None = None,
) -> MaskPlan:
    """Sample the training mask of one channel.

    Args:
        generator: Torch generator for u' and the Bernoulli draws.
        n_frames: Sequence length T, at least 1.
        channel: Channel index recorded on the plan.
        u: Pinned u' in [0, pi/2]; drawn when None.

    Raises:
        ValueError: If n_frames < 1.
    """
    if n_frames < 1:
        raise ValueError(f"n_frames must be >= 1, got {n_frames}")
    if u is None:
        ratio = float(sample_mask_ratios(1, generator)[0])
    else:
        ratio = float(mask_ratio(torch.tensor(u, dtype=torch.float64)))
    mask = torch.rand(n_frames, generator=generator, dtype=torch.float64) < ratio
    return MaskPlan(channel=channel, mask=mask, ratio=ratio)


def sample_training_masks(
    frame_mask: torch.Tensor, n_channels: int, generator: torch.Generator | None = None
) -> tuple[torch.Tensor, torch.Tensor]:
    """One random channel and one Bernoulli(cos u') mask per batch element.

    Returns:
        (channels of shape (B,), masks of shape (B, T)); masks are False on padding.
    """
    batch, n_frames = frame_mask.shape
    channels = torch.randint(n_channels, (batch,), generator=generator)
    ratios = sample_mask_ratios(batch, generator)
    draws = torch.rand((batch, n_frames), generator=generator, dtype=torch.float64)
    masks = (draws < ratios.unsqueeze(1)) & frame_mask
    return channels, masks


# Codec decoder


class CodecGenerator(nn.Module):
    """Bidirectional masked token decoder over all codec channels."""

    def __init__(self, layout: ChannelLayout, config: GeneratorConfig) -> None:
        super().__init__()
        self.layout = layout
        self.n_channels = layout.n_channels
        self.codebook_size = layout.codebook_size
        d = config.d_hidden
        self.token_embeddings = nn.ModuleList(
            nn.Embedding(layout.codebook_size, d) for _ in range(layout.n_channels)
        )
        self.mask_embedding = nn.Parameter(torch.randn(layout.n_channels, d) * 0.02)
        self.channel_embedding = nn.Embedding(layout.n_channels, d)
        self.position_embedding = nn.Embedding(config.max_positions, d)
        self.blocks = BlockStack(
            config.n_decoder_blocks, d, config.n_heads, config.d_ff, config.kernel_size, config.dropout
        )
        self.output_norm = nn.LayerNorm(d)
        self.heads = nn.ModuleList(
            nn.Linear(d, layout.codebook_size) for _ in range(layout.n_channels)
        )
        for head in self.heads:
            nn.init.normal_(head.weight, std=0.01)
            nn.init.zeros_(head.bias)

    def forward(
        self,
        tokens: torch.Tensor,
        frames: torch.Tensor,
        frame_mask: torch.Tensor,
        channels: torch.Tensor,
        token_mask: torch.Tensor,
    ) -> torch.Tensor:
        """Logits of the selected channel of every batch element.

        Args:
            tokens: Codec tokens (B, T, N); values at masked positions of the
                selected channel and at channels >= i are never read.
            frames: Length-regulated conditioning X (B, T, d_h).
            frame_mask: Bool validity mask (B, T).
            channels: Selected channel per element (B,).
            token_mask: Bool (B, T), True where the selected channel is masked.

        Returns:
            Logits of shape (B, T, codebook_size).
        """
        batch, n_frames, _ = tokens.shape
        if n_frames > self.position_embedding.num_embeddings:
            raise ValueError(f"T={n_frames} exceeds max_positions")
        embedded = torch.stack(
            [emb(tokens[..., c]) for c, emb in enumerate(self.token_embeddings)], dim=2
        )  # (B, T, N, d)
        channel_ids = torch.arange(self.n_channels, device=tokens.device)
        below = (channel_ids.unsqueeze(0) < channels.unsqueeze(1)).to(frames.dtype)  # (B, N)
        previous = (embedded * below[:, None, :, None]).sum(dim=2)

        index = channels.view(batch, 1, 1, 1).expand(batch, n_frames, 1, embedded.shape[-1])
        current = embedded.gather(2, index).squeeze(2)
        masked = self.mask_embedding[channels].unsqueeze(1).expand_as(current)
        current = torch.where(token_mask.unsqueeze(-1), masked, current)

        positions = torch.arange(n_frames, device=tokens.device)
        x = (
            frames
            + self.position_embedding(positions).unsqueeze(0)
            + self.channel_embedding(channels).unsqueeze(1)
            + previous
            + current
        )
        h = self.output_norm(self.blocks(x, frame_mask))

        all_logits = torch.stack([head(h) for head in self.heads], dim=2)  # (B, T, N, V)
        index = channels.view(batch, 1, 1, 1).expand(batch, n_frames, 1, self.codebook_size)
        return all_logits.gather(2, index).squeeze(2)


def masked_cross_entropy(
    logits: torch.Tensor, targets: torch.Tensor, loss_mask: torch.Tensor
) -> tuple[torch.Tensor, int]:
    """Cross-entropy averaged over masked positions only.

    Returns:
        (loss, number of masked positions); an empty mask gives an exact zero
        without gradient.
    """
    n_masked = int(loss_mask.sum())
    if n_masked == 0:
        return torch.zeros((), dtype=logits.dtype, device=logits.device), 0
    ce = F.cross_entropy(logits[loss_mask], targets[loss_mask], reduction="sum")
    return ce / n_masked, n_masked


# Inference


@dataclass
class DecodeSchedule:
    """Per-channel iteration counts of the iterative decoder."""

    iterations: list[int] = field(default_factory=list)

    @classmethod
    def from_config(cls, config: DecodeConfig, n_channels: int) -> DecodeSchedule:
        config.validate()
        return cls([config.iterations_first] + [config.iterations_rest] * (n_channels - 1))

    def validate(self, n_channels: int) -> None:
        if len(self.iterations) != n_channels:
            raise ValueError(f"schedule covers {len(self.iterations)} of {n_channels} channels")
        if any(j < 1 for j in self.iterations):
            raise ValueError("every channel needs at least one decode iteration")

    @staticmethod
    def committed_after(n_frames: int, iteration: int, n_iterations: int) -> int:
        """Cumulative committed positions after iteration j (0-based)."""
        remaining = math.floor(n_frames * math.cos(math.pi / 2 * (iteration + 1) / n_iterations))
        if iteration + 1 == n_iterations:
            remaining = 0
        return n_frames - max(0, remaining)

    @classmethod
    def commit_counts(cls, n_frames: int, n_iterations: int) -> list[int]:
        """Positions committed at each iteration; sums to n_frames."""
        cumulative = [cls.committed_after(n_frames, j, n_iterations) for j in range(n_iterations)]
        return [c - p for c, p in zip(cumulative, [0, *cumulative[:-1]], strict=True)]


def iteration_temperature(initial: float, iteration: int, n_iterations: int) -> float:
    """Linear annealing from the initial temperature to 0 at the last iteration.

    A single iteration samples at the initial temperature.
    """
    if n_iterations <= 1:
        return initial
    return initial * (1.0 - iteration / (n_iterations - 1))


@torch.no_grad()
def iterative_decode(
    generator_model: CodecGenerator,
    frames: torch.Tensor,
    frame_mask: torch.Tensor,
    schedule: DecodeSchedule,
    config: DecodeConfig | None = None,
    rng: torch.Generator | None = None,
    trace: list[list[torch.Tensor]] | None = None,
) -> torch.Tensor:
    """Confidence-based iterative decoding of every channel.

    Args:
        generator_model: Trained codec generator.
        frames: Conditioning X (B, T, d_h).
        frame_mask: Bool validity mask (B, T).
        schedule: Iterations per channel.
        config: Temperature and confidence settings.
        rng: Torch generator; decoding is a function of its state.
        trace: When given, receives per channel the committed mask after
            every iteration.

    Returns:
        Token tensor (B, T, N), 0 at padding.

    Raises:
        ValueError: If the schedule has a channel with zero iterations.
    """
    config = config or DecodeConfig()
    config.validate()
    schedule.validate(generator_model.n_channels)
    batch, n_frames, _ = frames.shape
    lengths = frame_mask.sum(dim=1).tolist()
    tokens = torch.zeros((batch, n_frames, generator_model.n_channels), dtype=torch.long, device=frames.device)

    for channel in range(generator_model.n_channels):
        n_iterations = schedule.iterations[channel]
        channels = torch.full((batch,), channel, dtype=torch.long, device=frames.device)
        committed = ~frame_mask.clone()
        history: list[torch.Tensor] = []
        counts = [DecodeSchedule.commit_counts(int(n), n_iterations) for n in lengths]

        for j in range(n_iterations):
            logits = generator_model(tokens, frames, frame_mask, channels, ~committed)
            probs = logits.float().softmax(dim=-1)
            tau = iteration_temperature(config.initial_temperature, j, n_iterations)
            if tau > 0.0:
                tempered = (logits.float() / tau).softmax(dim=-1)
                sampled = torch.multinomial(
                    tempered.view(-1, tempered.shape[-1]), 1, generator=rng
                ).view(batch, n_frames)
            else:
                sampled = logits.argmax(dim=-1)
            if config.confidence == "max":
                confidence = probs.max(dim=-1).values
            else:
                confidence = probs.gather(-1, sampled.unsqueeze(-1)).squeeze(-1)
            confidence = confidence.masked_fill(committed, -1.0)

            for b in range(batch):
                k = counts[b][j]
                if k == 0:
                    continue
                chosen = confidence[b].topk(k).indices
                tokens[b, chosen, channel] = sampled[b, chosen]
                committed[b, chosen] = True
            history.append((committed & frame_mask).clone())

        if trace is not None:
            trace.append(history)

    return tokens
