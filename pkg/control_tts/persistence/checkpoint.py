"""Checkpoint persistence adapter.

A checkpoint is a ``torch.save`` payload with a versioned header, the
resolved run configuration and its hash, the state of both models and
optimizers, the scheduler, the step and skip counters, and every random
stream. Loading refuses payloads whose header or configuration hash does
not match.

Author:
    Michael Economou

Date:
    2026-10-17
"""

from __future__ import annotations

import hashlib
import logging
import os
from pathlib import Path
from typing import Any

import torch

from control_tts.training.trainer import TrainState
from control_tts.utils.helpers import canonical_json

logger = logging.getLogger(__name__)

CHECKPOINT_HEADER: dict[str, Any] = {"format": "control-tts-checkpoint", "version": 1}


class CheckpointMismatchError(Exception):
    """Raised when a checkpoint's version or configuration does not match."""


def model_metadata(state: TrainState) -> dict[str, Any]:
    """Head settings evaluation checks before trusting a checkpoint."""
    config = state.model.config
    return {
        "n_components": config.smsd.n_components,
        "noise_mode": config.smsd.mode.value,
        "d_style": config.d_style,
        "d_timbre": config.d_timbre,
        "layout": config.layout.serialize(),
    }


def build_payload(state: TrainState, run_config: dict[str, Any], config_hash: str) -> dict[str, Any]:
    return {
        "header": dict(CHECKPOINT_HEADER),
        "config": run_config,
        "config_hash": config_hash,
        "metadata": model_metadata(state),
        "model": state.model.state_dict(),
        "codec_stage": state.codec_stage.state_dict(),
        "optimizer": state.optimizer.state_dict(),
        "stage_optimizer": state.stage_optimizer.state_dict(),
        "scheduler": state.scheduler.state_dict(),
        "step": state.step,
        "skipped": state.skipped,
        "rng": {
            "mask": state.mask_rng.get_state(),
            "noise": state.noise_rng.get_state(),
            "torch": torch.get_rng_state(),
        },
    }


def save_checkpoint(
    path: str | Path, state: TrainState, run_config: dict[str, Any], config_hash: str
) -> Path:
    """Write a checkpoint atomically."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    torch.save(build_payload(state, run_config, config_hash), tmp)
    os.replace(tmp, path)
    logger.info("Saved checkpoint at step %d to %s", state.step, path)
    return path


def read_checkpoint(path: str | Path, expected_hash: str | None = None) -> dict[str, Any]:
    """Read and verify a checkpoint payload.

    Args:
        path: Checkpoint file.
        expected_hash: Configuration hash the caller runs with; None skips
            the comparison.

    Raises:
        FileNotFoundError: If the file does not exist.
        CheckpointMismatchError: On a foreign header, another version or a
            different configuration hash.
    """
    payload = torch.load(Path(path), map_location="cpu", weights_only=True)
    header = payload.get("header") if isinstance(payload, dict) else None
    if header != CHECKPOINT_HEADER:
        raise CheckpointMismatchError(f"{path}: unsupported checkpoint header {header}")
    if expected_hash is not None and payload["config_hash"] != expected_hash:
        raise CheckpointMismatchError(
            f"{path}: configuration hash {payload['config_hash'][:12]} does not match "
            f"{expected_hash[:12]}"
        )
    return payload


def restore_state(payload: dict[str, Any], state: TrainState) -> TrainState:
    """Load a verified payload into a freshly created state.

    Raises:
        CheckpointMismatchError: If the model metadata differs from the state's.
    """
    expected = model_metadata(state)
    if payload["metadata"] != expected:
        raise CheckpointMismatchError(
            f"checkpoint model {payload['metadata']} does not match configured model {expected}"
        )
    state.model.load_state_dict(payload["model"])
    state.codec_stage.load_state_dict(payload["codec_stage"])
    state.optimizer.load_state_dict(payload["optimizer"])
    state.stage_optimizer.load_state_dict(payload["stage_optimizer"])
    state.scheduler.load_state_dict(payload["scheduler"])
    state.step = int(payload["step"])
    state.skipped = int(payload["skipped"])
    state.mask_rng.set_state(payload["rng"]["mask"])
    state.noise_rng.set_state(payload["rng"]["noise"])
    torch.set_rng_state(payload["rng"]["torch"])
    return state


def load_checkpoint(path: str | Path, state: TrainState, expected_hash: str | None = None) -> TrainState:
    """Read a checkpoint and restore it into state."""
    state = restore_state(read_checkpoint(path, expected_hash), state)
    logger.info("Restored checkpoint %s at step %d", path, state.step)
    return state


def payload_digest(payload: Any) -> str:
    """SHA-256 over every tensor's bytes and every plain value, in key order."""
    digest = hashlib.sha256()

    def visit(value: Any, key: str) -> None:
        if isinstance(value, torch.Tensor):
            digest.update(key.encode())
            digest.update(str(value.dtype).encode())
            digest.update(str(tuple(value.shape)).encode())
            digest.update(value.detach().cpu().contiguous().reshape(-1).view(torch.uint8).numpy().tobytes())
        elif isinstance(value, dict):
            for name in sorted(value, key=str):
                visit(value[name], f"{key}/{name}")
        elif isinstance(value, list | tuple):
            for i, item in enumerate(value):
                visit(item, f"{key}[{i}]")
        else:
            digest.update(f"{key}={canonical_json(value)}".encode())

    visit(payload, "")
    return digest.hexdigest()
