"""Composed controllable TTS model.

ControllableTTS chains the style-text encoder, the mixture head, the text
encoder with style fusion, the duration predictor and the codec generator.
It has no timbre input: timbre enters only in the separate CodecStage.

Training uses teacher forcing: the fused text states receive the
ground-truth style vector and the length regulator the ground-truth
durations; neither a sampled style nor predicted durations reach the codec
loss.

Author:
    Michael Economou

Date:
    2026-10-17
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import torch
from torch import nn

from control_tts.core.layout import ChannelLayout
from control_tts.models.fusion import FusionConfig
from control_tts.models.generator import (
    CodecGenerator,
    DecodeConfig,
    DecodeSchedule,
    DurationPredictor,
    GeneratorConfig,
    StyleFusion,
    TextEncoder,
    duration_loss,
    durations_from_log,
    iterative_decode,
    length_regulate,
    masked_cross_entropy,
    sample_training_masks,
)
from control_tts.models.smsd import MixtureParams, SmsdConfig, SmsdHead, mixture_mean, smsd_nll, smsd_sample
from control_tts.models.style_encoder import StyleTextEncoder

logger = logging.getLogger(__name__)


@dataclass
class ModelConfig:
    """Dimensions and sub-module settings of the full model.

    Attributes:
        text_vocab: Phoneme vocabulary size.
        prompt_vocab: Style prompt vocabulary size (set from the corpus).
        d_style: Style vector dimension d_s, also the encoder output dimension.
        d_timbre: Timbre dimension d_t.
        d_prompt_embed: Style-text word embedding width.
        freeze_style_encoder: Exclude the style-text encoder from training.
        layout: Codec channel layout.
        smsd: Mixture head settings.
        generator: Text encoder and decoder settings.
        fusion: Codec stage settings.
    """

    text_vocab: int = 40
    prompt_vocab: int = 0
    d_style: int = 16
    d_timbre: int = 32
    d_prompt_embed: int = 64
    freeze_style_encoder: bool = False
    layout: ChannelLayout = field(default_factory=ChannelLayout)
    smsd: SmsdConfig = field(default_factory=SmsdConfig)
    generator: GeneratorConfig = field(default_factory=GeneratorConfig)
    fusion: FusionConfig = field(default_factory=FusionConfig)

    def validate(self) -> None:
        if self.prompt_vocab < 3:
            raise ValueError("prompt_vocab must be set from the corpus vocabulary")
        if self.d_style < 1 or self.d_timbre < 1 or self.text_vocab < 1:
            raise ValueError("model dimensions must be positive")
        self.smsd.validate()
        self.generator.validate()
        self.fusion.validate()


@dataclass
class SynthesisResult:
    """Batched synthesis output.

    Attributes:
        tokens: Codec tokens (B, T, N), 0 at padding.
        frame_mask: Bool validity mask (B, T).
        durations: Predicted frames per phoneme (B, L).
        style: Style vectors fed to the fusion (B, d_s).
        components: Mixture component per element (B,).
    """

    tokens: torch.Tensor
    frame_mask: torch.Tensor
    durations: torch.Tensor
    style: torch.Tensor
    components: torch.Tensor


class ControllableTTS(nn.Module):
    """Style-prompted, timbre-free codec generator."""

    def __init__(self, config: ModelConfig) -> None:
        super().__init__()
        config.validate()
        self.config = config
        g = config.generator
        self.style_encoder = StyleTextEncoder(config.prompt_vocab, config.d_style, config.d_prompt_embed)
        self.smsd = SmsdHead(config.d_style, config.d_style, config.smsd)
        self.text_encoder = TextEncoder(config.text_vocab, g)
        self.style_fusion = StyleFusion(g.d_hidden, config.d_style, g.n_heads)
        self.duration_predictor = DurationPredictor(g.d_hidden, g.duration_channels, g.kernel_size)
        self.codec_generator = CodecGenerator(config.layout, g)
        if config.freeze_style_encoder:
            for param in self.style_encoder.parameters():
                param.requires_grad_(False)

    def mixture(self, prompt_ids: torch.Tensor, noise: torch.Tensor | None = None) -> MixtureParams:
        return self.smsd(self.style_encoder(prompt_ids), noise)

    def encode_text(
        self, text_ids: torch.Tensor, text_mask: torch.Tensor, style: torch.Tensor
    ) -> torch.Tensor:
        """Text states fused with the style vector (B, L, d_h)."""
        hidden = self.text_encoder(text_ids, text_mask)
        fused = self.style_fusion(hidden, style.unsqueeze(1))
        return fused * text_mask.unsqueeze(-1).to(fused.dtype)

    def training_losses(
        self,
        text_ids: torch.Tensor,
        text_mask: torch.Tensor,
        durations: torch.Tensor,
        prompt_ids: torch.Tensor,
        style_targets: torch.Tensor,
        codec: torch.Tensor,
        mask_rng: torch.Generator | None = None,
        noise_rng: torch.Generator | None = None,
    ) -> dict[str, torch.Tensor]:
        """Teacher-forced loss terms of one batch.

        Returns:
            Dictionary with scalar tensors ``codec``, ``dur`` and ``smsd`` plus
            integer tensors ``n_masked`` and ``n_skipped`` (elements whose mask
            was empty).
        """
        smsd_cfg = self.config.smsd
        x = self.style_encoder(prompt_ids)
        noise = self.smsd.draw_noise(x.shape[0], noise_rng) if self.smsd.learns_variance else None
        mp = self.smsd(x, noise)
        loss_smsd = smsd_nll(
            style_targets, mp, exact_constant=smsd_cfg.exact_constant, reduced_nll=smsd_cfg.reduced_nll
        )

        hidden = self.encode_text(text_ids, text_mask, style_targets)
        loss_dur = duration_loss(self.duration_predictor(hidden, text_mask), durations, text_mask)

        frames, frame_mask = length_regulate(hidden, durations)
        codec = codec[:, : frames.shape[1]]
        channels, masks = sample_training_masks(frame_mask, self.config.layout.n_channels, mask_rng)
        logits = self.codec_generator(codec, frames, frame_mask, channels, masks)
        targets = codec.gather(2, channels.view(-1, 1, 1).expand(-1, codec.shape[1], 1)).squeeze(2)
        loss_codec, n_masked = masked_cross_entropy(logits, targets, masks)
        n_skipped = int((masks.sum(dim=1) == 0).sum())

        return {
            "codec": loss_codec,
            "dur": loss_dur,
            "smsd": loss_smsd,
            "n_masked": torch.tensor(n_masked),
            "n_skipped": torch.tensor(n_skipped),
        }

    @torch.no_grad()
    def infer_style(
        self,
        prompt_ids: torch.Tensor,
        rng: torch.Generator | None = None,
        deterministic: bool = False,
    ) -> tuple[torch.Tensor, torch.Tensor]:
        """Style vectors for inference.

        Args:
            prompt_ids: Padded prompt ids (B, P).
            rng: Generator of the mixture draws.
            deterministic: Use the analytic mixture mean instead of sampling.

        Returns:
            (style vectors (B, d_s), components (B,)); in deterministic mode the
            component is the most probable one.
        """
        x = self.style_encoder(prompt_ids)
        noise = None
        if self.config.smsd.inference_noise and self.smsd.learns_variance:
            noise = self.smsd.draw_noise(x.shape[0], rng)
        mp = self.smsd(x, noise)
        if deterministic:
            return mixture_mean(mp), mp.log_weights.argmax(dim=-1)
        return smsd_sample(mp, rng)

    @torch.no_grad()
    def synthesize(
        self,
        text_ids: torch.Tensor,
        text_mask: torch.Tensor,
        prompt_ids: torch.Tensor,
        decode: DecodeConfig | None = None,
        rng: torch.Generator | None = None,
        style: torch.Tensor | None = None,
        deterministic_style: bool = False,
    ) -> SynthesisResult:
        """Generate codec tokens from text and a style prompt.

        Args:
            text_ids: Shifted phoneme ids (B, L).
            text_mask: Bool validity mask (B, L).
            prompt_ids: Padded style prompt ids (B, P).
            decode: Iterative decoding settings.
            rng: Generator for style sampling and decoding.
            style: Pinned style vectors; skips the mixture head.
            deterministic_style: Use the mixture mean instead of sampling.
        """
        decode = decode or DecodeConfig()
        if style is None:
            style, components = self.infer_style(prompt_ids, rng, deterministic_style)
        else:
            components = torch.full((style.shape[0],), -1, dtype=torch.long)
        hidden = self.encode_text(text_ids, text_mask, style)
        durations = durations_from_log(self.duration_predictor(hidden, text_mask), text_mask)
        # Keep T within the decoder's learned positions.
        cap = max(1, self.config.generator.max_positions // text_ids.shape[1])
        durations = durations.clamp(max=cap) * text_mask.long()
        frames, frame_mask = length_regulate(hidden, durations)
        schedule = DecodeSchedule.from_config(decode, self.config.layout.n_channels)
        tokens = iterative_decode(self.codec_generator, frames, frame_mask, schedule, decode, rng)
        return SynthesisResult(tokens, frame_mask, durations, style, components)
