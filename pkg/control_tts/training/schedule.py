"""Learning-rate schedule: linear warmup from 0, then linear decay to 0.

Author:
    Michael Economou

Date:
    2026-10-17
"""

from __future__ import annotations

import torch
from torch.optim.lr_scheduler import LambdaLR


def warmup_linear_decay(step: int, warmup_steps: int, total_steps: int) -> float:
    """Multiplier of the peak learning rate at a step.

    0 at step 0, 1 at ``warmup_steps``, 0 again at ``total_steps``.
    """
    if step < warmup_steps:
        return step / warmup_steps
    if total_steps <= warmup_steps:
        return 1.0 if step <= warmup_steps else 0.0
    return max(0.0, (total_steps - step) / (total_steps - warmup_steps))


def make_scheduler(optimizer: torch.optim.Optimizer, warmup_steps: int, total_steps: int) -> LambdaLR:
    return LambdaLR(optimizer, lambda step: warmup_linear_decay(step, warmup_steps, total_steps))
