"""Keyword lexicon of the style prompts.

Each (attribute, category) owns a few interchangeable keywords. Keywords are
unique across attributes, so a bag-of-words encoder can always tell which
attribute a word describes.

Author:
    Michael Economou

Date:
    2026-10-17
"""

from __future__ import annotations

LEXICON: dict[str, dict[str, tuple[str, ...]]] = {
    "gender": {
        "male": ("male", "man", "gentleman"),
        "female": ("female", "woman", "lady"),
    },
    "pitch": {
        "low": ("low-pitched", "deep", "bassy"),
        "normal": ("mid-pitched", "medium-pitched", "middle-register"),
        "high": ("high-pitched", "shrill", "squeaky"),
    },
    "speed": {
        "slow": ("slowly", "unhurriedly", "sluggishly"),
        "normal": ("steadily", "evenly-paced", "moderately-paced"),
        "fast": ("quickly", "rapidly", "fast"),
    },
    "energy": {
        "low": ("quiet", "soft", "whispery"),
        "normal": ("medium-volume", "moderate-volume", "even-volume"),
        "high": ("loud", "booming", "forceful"),
    },
    "emotion": {
        "neutral": ("neutral", "calm", "composed"),
        "happy": ("happy", "cheerful", "joyful"),
        "sad": ("sad", "sorrowful", "gloomy"),
        "angry": ("angry", "furious", "irritated"),
        "surprised": ("surprised", "astonished", "amazed"),
        "fearful": ("fearful", "scared", "anxious"),
        "disgusted": ("disgusted", "repulsed", "revolted"),
    },
}


def keywords(attribute: str, category: str) -> tuple[str, ...]:
    """Keyword variants describing one category of an attribute.

    Raises:
        ValueError: If the attribute or category has no lexicon entry.
    """
    try:
        return LEXICON[attribute][category]
    except KeyError:
        raise ValueError(f"No keywords for {attribute}={category!r}") from None


def all_keywords() -> list[str]:
    """Every keyword of the lexicon, in a stable order."""
    return [word for table in LEXICON.values() for words in table.values() for word in words]
