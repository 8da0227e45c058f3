"""General helper functions shared across layers.

This module provides small utilities that do not depend on torch, suitable
for use in the IO-free core as well as in the training and CLI layers.

Functions:
    canonical_json: Deterministic JSON encoding used for hashing and files.
    stable_hash: SHA-256 hex digest of a JSON-serializable object.
    derive_seed: Derive an independent integer seed for a named purpose.

Author:
    Michael Economou

Date:
    2026-10-17
"""

from __future__ import annotations

import hashlib
import json
from typing import Any

import numpy as np


def canonical_json(data: Any) -> str:
    """Encode data as compact JSON with sorted keys.

    Two equal objects always produce the same string, which is what makes
    corpus files and config hashes byte-reproducible.

    Args:
        data: JSON-serializable object.

    Returns:
        Canonical JSON text.
    """
    return json.dumps(data, sort_keys=True, separators=(",", ":"), allow_nan=False)


def stable_hash(data: Any) -> str:
    """Return the SHA-256 hex digest of the canonical JSON encoding of data."""
    return hashlib.sha256(canonical_json(data).encode("utf-8")).hexdigest()


def derive_seed(seed: int, *path: int | str) -> int:
    """Derive an independent 63-bit seed from a master seed and a path.

    String path components are hashed so purposes can be named
    (``derive_seed(7, "mask")``). The derivation goes through
    numpy's SeedSequence, so sibling paths give statistically
    independent streams.

    Args:
        seed: Master seed.
        *path: Purpose identifiers (ints or strings).

    Returns:
        Non-negative integer seed.
    """
    entropy: list[int] = [int(seed)]
    for part in path:
        if isinstance(part, str):
            entropy.append(int(hashlib.sha256(part.encode("utf-8")).hexdigest()[:8], 16))
        else:
            entropy.append(int(part))
    state = np.random.SeedSequence(entropy).generate_state(2, dtype=np.uint32)
    return (int(state[0]) << 31) ^ int(state[1])
