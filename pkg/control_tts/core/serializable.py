"""Base class providing the snapshot serialization interface.

This module defines the Serializable base class that every persisted domain
record (labels, layouts, utterances, dataset configs, evaluation reports)
inherits from. It provides a consistent interface for converting records
to/from plain dictionaries that the persistence adapters write as JSON.

Core code never touches files: it only produces and consumes dictionaries.

Author:
    Michael Economou

Date:
    2026-10-17
"""

from __future__ import annotations

from typing import TYPE_CHECKING, Any

if TYPE_CHECKING:
    from typing_extensions import Self


class Serializable:
    """Base class for records supporting dictionary serialization.

    Subclasses must implement serialize() and the deserialize() classmethod.
    The returned dictionaries contain only JSON-native values (str, int,
    float, bool, lists and dicts thereof).
    """

    def serialize(self) -> dict[str, Any]:
        """Convert this record to a dictionary representation.

        Returns:
            Dictionary containing all state needed to rebuild the record.

        Raises:
            NotImplementedError: Always raised if not overridden in subclass.
        """
        raise NotImplementedError(f"{self.__class__.__name__} must implement serialize()")

    @classmethod
    def deserialize(cls, data: dict[str, Any]) -> Self:
        """Rebuild a record from its dictionary representation.

        Args:
            data: Dictionary previously produced by serialize().

        Returns:
            New record equal to the one that was serialized.

        Raises:
            NotImplementedError: Always raised if not overridden in subclass.
        """
        raise NotImplementedError(f"{cls.__name__} must implement deserialize()")
