"""Joint training of the TTS model and the codec stage.

One step optimizes L = w_codec·L_codec + w_dur·L_dur + w_smsd·L_smsd with
AdamW, global-norm clipping and a warmup/linear-decay schedule. The codec
stage (timbre extractor and readout) has its own optimizer and its cosine
losses never enter L.

Randomness comes from streams derived from the master seed: model
initialization, training masks and the mixture-head noise each have their
own generator, and the batch order is a function of (seed, epoch).

Author:
    Michael Economou

Date:
    2026-10-17
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Any

import torch
from torch import nn
from tqdm import tqdm

from control_tts.models.fusion import CodecStage
from control_tts.models.tts import ControllableTTS, ModelConfig
from control_tts.training.data import Batch, BatchStream
from control_tts.training.schedule import make_scheduler
from control_tts.utils.helpers import derive_seed

logger = logging.getLogger(__name__)

LOSS_TERMS: tuple[str, ...] = ("codec", "dur", "smsd")


class NonFiniteLossError(Exception):
    """Raised when a training loss turns NaN or infinite.

    Attributes:
        step: Step at which the loss was computed.
        breakdown: Loss values of that step.
    """

    def __init__(self, step: int, breakdown: dict[str, float]) -> None:
        super().__init__(f"non-finite loss at step {step}: {breakdown}")
        self.step = step
        self.breakdown = breakdown


@dataclass
class TrainConfig:
    """Optimization settings.

    Attributes:
        batch_frames: Padded frame budget per batch.
        peak_lr: Peak learning rate.
        warmup_steps: Linear warmup length.
        total_steps: Steps of a full run; the rate reaches 0 here.
        beta1: AdamW first moment decay.
        beta2: AdamW second moment decay.
        weight_decay: AdamW weight decay.
        seed: Master seed of every training stream.
        loss_weights: Weight per loss term.
        grad_clip: Global gradient-norm clip.
        checkpoint_every: Periodic checkpoint interval, 0 disables.
        log_every: Progress log interval.
    """

    batch_frames: int = 4096
    peak_lr: float = 5e-4
    warmup_steps: int = 500
    total_steps: int = 3000
    beta1: float = 0.9
    beta2: float = 0.95
    weight_decay: float = 0.01
    seed: int = 7
    loss_weights: dict[str, float] = field(
        default_factory=lambda: {"codec": 1.0, "dur": 1.0, "smsd": 1.0}
    )
    grad_clip: float = 1.0
    checkpoint_every: int = 500
    log_every: int = 50

    def validate(self) -> None:
        if self.batch_frames < 1 or self.total_steps < 1:
            raise ValueError("batch_frames and total_steps must be positive")
        if self.peak_lr < 0.0 or self.warmup_steps < 0 or self.grad_clip <= 0.0:
            raise ValueError("peak_lr and warmup_steps must be non-negative, grad_clip positive")
        if not (0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0):
            raise ValueError("betas must lie in [0, 1)")
        if self.log_every < 1 or self.checkpoint_every < 0:
            raise ValueError("log_every must be positive and checkpoint_every non-negative")
        if set(self.loss_weights) != set(LOSS_TERMS):
            raise ValueError(f"loss_weights must name exactly {LOSS_TERMS}")


@dataclass
class TrainState:
    """Everything a checkpoint restores."""

    model: ControllableTTS
    codec_stage: CodecStage
    optimizer: torch.optim.Optimizer
    stage_optimizer: torch.optim.Optimizer
    scheduler: torch.optim.lr_scheduler.LambdaLR
    mask_rng: torch.Generator
    noise_rng: torch.Generator
    step: int = 0
    skipped: int = 0


def seeded_generator(seed: int, purpose: str) -> torch.Generator:
    generator = torch.Generator()
    generator.manual_seed(derive_seed(seed, purpose))
    return generator


def create_train_state(model_config: ModelConfig, config: TrainConfig) -> TrainState:
    """Build freshly initialized models, optimizers and random streams."""
    config.validate()
    torch.manual_seed(derive_seed(config.seed, "init"))
    model = ControllableTTS(model_config)
    stage = CodecStage(model_config.layout, model_config.d_timbre, model_config.fusion)
    trainable = [p for p in model.parameters() if p.requires_grad]
    optimizer = torch.optim.AdamW(
        trainable,
        lr=config.peak_lr,
        betas=(config.beta1, config.beta2),
        weight_decay=config.weight_decay,
    )
    stage_optimizer = torch.optim.AdamW(stage.parameters(), lr=model_config.fusion.learning_rate)
    return TrainState(
        model=model,
        codec_stage=stage,
        optimizer=optimizer,
        stage_optimizer=stage_optimizer,
        scheduler=make_scheduler(optimizer, config.warmup_steps, config.total_steps),
        mask_rng=seeded_generator(config.seed, "mask"),
        noise_rng=seeded_generator(config.seed, "smsd_noise"),
    )


def _finite(values: dict[str, float]) -> bool:
    return all(math.isfinite(v) for v in values.values())


def train_step(batch: Batch, state: TrainState, config: TrainConfig) -> tuple[TrainState, dict[str, Any]]:
    """Run one optimizer update on both optimizers.

    Returns:
        The updated state and a breakdown with ``step``, ``lr``, the three
        weighted loss terms, ``total``, the codec-stage losses, ``n_masked``
        and the cumulative ``skipped`` counter.

    Raises:
        NonFiniteLossError: If any loss is NaN or infinite; no update is applied.
    """
    model, stage = state.model, state.codec_stage
    model.train()
    stage.train()
    lr = float(state.scheduler.get_last_lr()[0])

    losses = model.training_losses(
        batch.text_ids,
        batch.text_mask,
        batch.durations,
        batch.prompt_ids,
        batch.style,
        batch.codec,
        mask_rng=state.mask_rng,
        noise_rng=state.noise_rng,
    )
    total = sum(config.loss_weights[name] * losses[name] for name in LOSS_TERMS)
    stage_losses = stage.losses(
        batch.codec, batch.frame_mask, batch.timbre, batch.prompt_frames, batch.frame_mask
    )
    stage_total = stage_losses["timbre_extract"] + stage_losses["timbre_readout"]

    values = {name: float(losses[name]) for name in LOSS_TERMS}
    values["total"] = float(total)
    values.update({name: float(v) for name, v in stage_losses.items()})
    if not _finite(values):
        logger.error("Non-finite loss at step %d: %s", state.step, values)
        raise NonFiniteLossError(state.step, values)

    state.optimizer.zero_grad(set_to_none=True)
    assert isinstance(total, torch.Tensor)
    total.backward()
    nn.utils.clip_grad_norm_([p for p in model.parameters() if p.requires_grad], config.grad_clip)
    state.optimizer.step()
    state.scheduler.step()

    state.stage_optimizer.zero_grad(set_to_none=True)
    stage_total.backward()
    nn.utils.clip_grad_norm_(stage.parameters(), config.grad_clip)
    state.stage_optimizer.step()

    n_skipped = int(losses["n_skipped"])
    if n_skipped:
        logger.debug("Step %d: %d elements with empty masks skipped", state.step, n_skipped)
    state.skipped += n_skipped
    breakdown: dict[str, Any] = {"step": state.step, "lr": lr, **values}
    breakdown["n_masked"] = int(losses["n_masked"])
    breakdown["skipped"] = state.skipped
    state.step += 1
    return state, breakdown


class Trainer:
    """Drives train_step over a batch stream.

    Args:
        config: Optimization settings.
        stream: Step-indexed training batches.
        log_sink: Receives every step breakdown (the train log).
        checkpoint_sink: Called with the state every ``checkpoint_every`` steps.
        show_progress: Display a tqdm progress bar.
    """

    def __init__(
        self,
        config: TrainConfig,
        stream: BatchStream,
        log_sink: Callable[[dict[str, Any]], None] | None = None,
        checkpoint_sink: Callable[[TrainState], None] | None = None,
        show_progress: bool = False,
    ) -> None:
        self.config = config
        self.stream = stream
        self.log_sink = log_sink
        self.checkpoint_sink = checkpoint_sink
        self.show_progress = show_progress

    def run(self, state: TrainState, until_step: int | None = None) -> list[dict[str, Any]]:
        """Train from state.step up to until_step (default: total_steps).

        Returns:
            Breakdowns of the executed steps.
        """
        end = self.config.total_steps if until_step is None else until_step
        history: list[dict[str, Any]] = []
        if state.step >= end:
            logger.info("Nothing to do: state already at step %d", state.step)
            return history
        logger.info("Training steps %d..%d", state.step, end)
        progress = tqdm(total=end - state.step, disable=not self.show_progress, desc="train")
        try:
            while state.step < end:
                batch = self.stream.batch_at(state.step)
                state, breakdown = train_step(batch, state, self.config)
                history.append(breakdown)
                if self.log_sink is not None:
                    self.log_sink(breakdown)
                if breakdown["step"] % self.config.log_every == 0:
                    logger.info(
                        "step %d lr %.2e codec %.4f dur %.4f smsd %.4f",
                        breakdown["step"],
                        breakdown["lr"],
                        breakdown["codec"],
                        breakdown["dur"],
                        breakdown["smsd"],
                    )
                progress.update(1)
                progress.set_postfix(codec=f"{breakdown['codec']:.3f}")
                every = self.config.checkpoint_every
                if self.checkpoint_sink is not None and every and state.step % every == 0:
                    self.checkpoint_sink(state)
        finally:
            progress.close()
        return history
