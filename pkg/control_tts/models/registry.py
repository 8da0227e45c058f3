"""Central registry of mixture-variance noise modes.

Maps every NoiseMode to the reducer class that turns the raw per-component,
per-dimension variances of the mixture head into the shape the mode ties.

Usage:
    Register a reducer with the decorator::

        from control_tts.models.registry import NoiseModeRegistry

        @NoiseModeRegistry.register(NoiseMode.ISOTROPIC)
        class IsotropicReducer(VarianceReducer):
            ...

        reducer = NoiseModeRegistry.create(NoiseMode.ISOTROPIC)

Author:
    Michael Economou

Date:
    2026-10-17
"""

from __future__ import annotations

import logging
from collections.abc import Callable
from enum import Enum
from typing import Any

logger = logging.getLogger(__name__)


class NoiseMode(str, Enum):
    """Tying pattern of the mixture variances."""

    FULLY_FACTORED = "fully_factored"
    ISOTROPIC = "isotropic"
    ISOTROPIC_ACROSS_CLUSTERS = "isotropic_across_clusters"
    FIXED_ISOTROPIC = "fixed_isotropic"

    @classmethod
    def parse(cls, value: str | NoiseMode) -> NoiseMode:
        """Accept enum values, snake_case names or CamelCase names.

        Raises:
            ValueError: If value names no mode.
        """
        if isinstance(value, NoiseMode):
            return value
        key = "".join(ch if ch.islower() or ch == "_" else f"_{ch.lower()}" for ch in value)
        key = key.strip("_").replace("__", "_")
        for mode in cls:
            if value == mode.value or key == mode.value:
                return mode
        raise ValueError(f"Unknown noise mode '{value}' (choose from {[m.value for m in cls]})")


class NoiseModeRegistry:
    """Registry of variance reducers keyed by NoiseMode.

    Attributes:
        _reducers: Dictionary mapping modes to reducer classes.
    """

    _reducers: dict[NoiseMode, type] = {}

    @classmethod
    def register(cls, mode: NoiseMode) -> Callable[[type], type]:
        """Decorator to register a reducer class for a mode.

        Args:
            mode: Noise mode handled by the decorated class.

        Returns:
            Decorator function that registers the class.

        Raises:
            ValueError: If mode is already registered.
        """

        def decorator(reducer_class: type) -> type:
            if mode in cls._reducers:
                existing = cls._reducers[mode].__name__
                logger.error(
                    "Duplicate noise mode %s: already registered to %s, cannot register %s",
                    mode.value,
                    existing,
                    reducer_class.__name__,
                )
                raise ValueError(f"Noise mode {mode.value} already registered to {existing}")
            cls._reducers[mode] = reducer_class
            reducer_class.mode = mode  # type: ignore[attr-defined]
            logger.debug("Registered reducer: %s for %s", reducer_class.__name__, mode.value)
            return reducer_class

        return decorator

    @classmethod
    def get_reducer_class(cls, mode: NoiseMode | str) -> type | None:
        """Look up the reducer class of a mode, None if not registered."""
        return cls._reducers.get(NoiseMode.parse(mode))

    @classmethod
    def create(cls, mode: NoiseMode | str, **kwargs: Any) -> Any:
        """Instantiate the reducer of a mode.

        Raises:
            ValueError: If no reducer is registered for the mode.
        """
        reducer_class = cls.get_reducer_class(mode)
        if reducer_class is None:
            raise ValueError(f"No reducer registered for noise mode {mode}")
        return reducer_class(**kwargs)

    @classmethod
    def get_all_modes(cls) -> dict[NoiseMode, type]:
        return cls._reducers.copy()
