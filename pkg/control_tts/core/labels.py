"""Attribute labels and their category domains.

Every synthetic utterance carries one category for each of five style
attributes: gender, pitch, speed, energy and emotion. The category sets are
fixed when a dataset is generated and recorded in its manifest.

Style attributes are handled in a fixed order throughout the code base
(``STYLE_ATTRIBUTES``); the four graded ones additionally carry a continuous
degree within their label bin.

Author:
    Michael Economou

Date:
    2026-10-17
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from control_tts.core.serializable import Serializable

GENDERS: tuple[str, ...] = ("male", "female")
LEVELS: tuple[str, ...] = ("low", "normal", "high")
SPEEDS: tuple[str, ...] = ("slow", "normal", "fast")
KNOWN_EMOTIONS: tuple[str, ...] = (
    "neutral",
    "happy",
    "sad",
    "angry",
    "surprised",
    "fearful",
    "disgusted",
)

# Attributes in channel-assignment order. Gender is label-only.
STYLE_ATTRIBUTES: tuple[str, ...] = ("pitch", "speed", "energy", "emotion", "gender")
GRADED_ATTRIBUTES: tuple[str, ...] = ("pitch", "speed", "energy", "emotion")


@dataclass(frozen=True)
class CategorySets(Serializable):
    """Category domains for the five attributes.

    Attributes:
        gender: Gender categories.
        pitch: Pitch categories.
        speed: Speaking speed categories.
        energy: Energy (volume) categories.
        emotion: Emotion categories, the first one is the neutral class.
    """

    gender: tuple[str, ...] = GENDERS
    pitch: tuple[str, ...] = LEVELS
    speed: tuple[str, ...] = SPEEDS
    energy: tuple[str, ...] = LEVELS
    emotion: tuple[str, ...] = KNOWN_EMOTIONS[:5]

    @classmethod
    def with_emotions(cls, n_emotions: int) -> CategorySets:
        """Build the default category sets with E emotion classes.

        Args:
            n_emotions: Number of emotion classes, neutral included.

        Returns:
            CategorySets with the first n_emotions known emotions.

        Raises:
            ValueError: If n_emotions is outside [2, len(KNOWN_EMOTIONS)].
        """
        if not 2 <= n_emotions <= len(KNOWN_EMOTIONS):
            raise ValueError(
                f"n_emotions must be in [2, {len(KNOWN_EMOTIONS)}], got {n_emotions}"
            )
        return cls(emotion=KNOWN_EMOTIONS[:n_emotions])

    def domain(self, attribute: str) -> tuple[str, ...]:
        """Return the category tuple of an attribute."""
        if attribute not in STYLE_ATTRIBUTES:
            raise ValueError(f"Unknown attribute '{attribute}'")
        domain: tuple[str, ...] = getattr(self, attribute)
        return domain

    @property
    def neutral_emotion(self) -> str:
        return self.emotion[0]

    def serialize(self) -> dict[str, Any]:
        return {name: list(self.domain(name)) for name in STYLE_ATTRIBUTES}

    @classmethod
    def deserialize(cls, data: dict[str, Any]) -> CategorySets:
        return cls(**{name: tuple(data[name]) for name in STYLE_ATTRIBUTES})


@dataclass(frozen=True)
class AttributeLabels(Serializable):
    """One category per attribute for a single utterance.

    Attributes:
        gender: Gender category.
        pitch: Pitch category.
        speed: Speaking speed category.
        energy: Energy category.
        emotion: Emotion category.
    """

    gender: str
    pitch: str
    speed: str
    energy: str
    emotion: str

    def get(self, attribute: str) -> str:
        """Return the category of a named attribute."""
        if attribute not in STYLE_ATTRIBUTES:
            raise ValueError(f"Unknown attribute '{attribute}'")
        value: str = getattr(self, attribute)
        return value

    def validate(self, categories: CategorySets) -> None:
        """Check every field against its category domain.

        Raises:
            ValueError: If a field holds a category outside its domain.
        """
        for name in STYLE_ATTRIBUTES:
            if self.get(name) not in categories.domain(name):
                raise ValueError(
                    f"{name}={self.get(name)!r} is not one of {categories.domain(name)}"
                )

    def index(self, attribute: str, categories: CategorySets) -> int:
        """Return the position of this utterance's category in its domain."""
        return categories.domain(attribute).index(self.get(attribute))

    def as_tuple(self) -> tuple[str, ...]:
        return tuple(self.get(name) for name in STYLE_ATTRIBUTES)

    def serialize(self) -> dict[str, Any]:
        return {name: self.get(name) for name in STYLE_ATTRIBUTES}

    @classmethod
    def deserialize(cls, data: dict[str, Any]) -> AttributeLabels:
        return cls(**{name: str(data[name]) for name in STYLE_ATTRIBUTES})


@dataclass(frozen=True)
class Degrees(Serializable):
    """Continuous intensity of each graded attribute within its label bin.

    Values lie in [0, 1) and are quantized to the dataset's degree grid.
    """

    values: dict[str, float] = field(default_factory=dict)

    def __getitem__(self, attribute: str) -> float:
        return self.values[attribute]

    def as_list(self) -> list[float]:
        return [self.values[name] for name in GRADED_ATTRIBUTES]

    def serialize(self) -> dict[str, Any]:
        return {name: self.values[name] for name in GRADED_ATTRIBUTES}

    @classmethod
    def deserialize(cls, data: dict[str, Any]) -> Degrees:
        return cls({name: float(data[name]) for name in GRADED_ATTRIBUTES})
