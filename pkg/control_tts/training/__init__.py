"""Training: batching, learning-rate schedule and the joint trainer.

Author:
    Michael Economou

Date:
    2026-10-17
"""

from control_tts.training.data import (
    Batch,
    BatchStream,
    PreparedUtterance,
    collate,
    plan_batches,
    prepare_split,
    prepare_utterance,
)
from control_tts.training.schedule import make_scheduler, warmup_linear_decay
from control_tts.training.trainer import (
    LOSS_TERMS,
    NonFiniteLossError,
    TrainConfig,
    Trainer,
    TrainState,
    create_train_state,
    train_step,
)

__all__ = [
    "LOSS_TERMS",
    "Batch",
    "BatchStream",
    "NonFiniteLossError",
    "PreparedUtterance",
    "TrainConfig",
    "TrainState",
    "Trainer",
    "collate",
    "create_train_state",
    "make_scheduler",
    "plan_batches",
    "prepare_split",
    "prepare_utterance",
    "train_step",
    "warmup_linear_decay",
]
