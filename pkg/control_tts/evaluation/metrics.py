"""Exact oracle metrics.

Every metric is an exact function of generated tokens or embeddings:
attribute accuracy against the prompted labels, content token error rate,
degree diversity, component-usage entropy, Wilson intervals and the
speaker-verification AUC of timbre embeddings.

Author:
    Michael Economou

Date:
    2026-10-17
"""

from __future__ import annotations

import math
from collections import Counter
from collections.abc import Sequence

import numpy as np
from scipy import stats

from control_tts.core.codec import ToyCodec
from control_tts.core.labels import AttributeLabels
from control_tts.core.layout import CodecMatrix

WILSON_Z95 = 1.959963984540054


def wilson_interval(successes: int, n: int, z: float = WILSON_Z95) -> tuple[float, float]:
    """Wilson score interval of a binomial proportion.

    Raises:
        ValueError: If n is not positive or successes is outside [0, n].
    """
    if n <= 0:
        raise ValueError(f"n must be positive, got {n}")
    if not 0 <= successes <= n:
        raise ValueError(f"successes must lie in [0, {n}], got {successes}")
    p = successes / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def entropy(counts: Sequence[int] | Counter[int]) -> float:
    """Shannon entropy in nats of a count histogram."""
    values = np.asarray(list(counts.values()) if isinstance(counts, Counter) else counts, dtype=np.float64)
    values = values[values > 0]
    if values.size == 0:
        return 0.0
    return float(stats.entropy(values))


def edit_distance(reference: Sequence[int], hypothesis: Sequence[int]) -> int:
    """Levenshtein distance between two token sequences."""
    previous = np.arange(len(hypothesis) + 1)
    for i, ref in enumerate(reference, start=1):
        current = np.empty_like(previous)
        current[0] = i
        for j, hyp in enumerate(hypothesis, start=1):
            current[j] = min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + (ref != hyp))
        previous = current
    return int(previous[-1])


def token_error_rate(reference: Sequence[int], hypothesis: Sequence[int]) -> float:
    """Edit distance normalized by the reference length."""
    if not reference:
        raise ValueError("reference must not be empty")
    return edit_distance(reference, hypothesis) / len(reference)


def attribute_hits(
    toy_codec: ToyCodec, codec: CodecMatrix, labels: AttributeLabels, attributes: Sequence[str]
) -> dict[str, bool]:
    """Whether the lenient decode of each attribute matches the prompted label."""
    readings = toy_codec.read_attributes(codec)
    hits = {}
    for name in attributes:
        reading = readings[name]
        hits[name] = reading is not None and reading[0] == labels.get(name)
    return hits


def speaker_auc(embeddings: np.ndarray, speaker_ids: Sequence[int]) -> float:
    """Probability that a same-speaker pair is more similar than a cross-speaker pair.

    Cosine similarities of all pairs are split into same- and cross-speaker
    groups; the AUC is the Mann-Whitney U statistic divided by n1·n2.

    Raises:
        ValueError: If either group is empty.
    """
    x = np.asarray(embeddings, dtype=np.float64)
    x = x / np.linalg.norm(x, axis=1, keepdims=True)
    sims = x @ x.T
    ids = np.asarray(speaker_ids)
    upper = np.triu_indices(len(ids), k=1)
    same = ids[upper[0]] == ids[upper[1]]
    pos, neg = sims[upper][same], sims[upper][~same]
    if pos.size == 0 or neg.size == 0:
        raise ValueError("speaker AUC needs both same-speaker and cross-speaker pairs")
    u = stats.mannwhitneyu(pos, neg, alternative="two-sided").statistic
    return float(u) / (pos.size * neg.size)


def standard_error(p: float, n: int) -> float:
    return math.sqrt(p * (1.0 - p) / n)
