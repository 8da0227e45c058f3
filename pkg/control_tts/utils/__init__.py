"""Utility functions and helpers for control-tts.

Functions:
    canonical_json: Deterministic JSON encoding.
    stable_hash: SHA-256 digest of canonical JSON.
    derive_seed: Per-purpose seed derivation.
    setup_logging: Configure process-wide logging handlers.

Author:
    Michael Economou

Date:
    2026-10-17
"""

from control_tts.utils.helpers import canonical_json, derive_seed, stable_hash
from control_tts.utils.logging_config import setup_logging

__all__ = [
    "canonical_json",
    "derive_seed",
    "stable_hash",
    "setup_logging",
]
