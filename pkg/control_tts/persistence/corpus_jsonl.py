"""JSON and line-delimited JSON persistence adapter.

This module lives outside `control_tts.core` so that core remains IO-free.
It writes corpora produced by `core.corpus.generate_corpus()` as one JSONL
file per split plus a manifest, and reads them back into SyntheticUtterance
records. JSON is always written with sorted keys so identical data gives
identical bytes.

Author:
    Michael Economou

Date:
    2026-10-17
"""

from __future__ import annotations

import json
import logging
import os
import shutil
from collections.abc import Iterable
from pathlib import Path
from typing import Any

from control_tts.constants import MANIFEST_FILE, SPLIT_FILE_SUFFIX
from control_tts.core.codec import DatasetConfig, SyntheticUtterance, ToyCodec
from control_tts.core.corpus import SPLIT_NAMES, Corpus
from control_tts.core.layout import ChannelLayout
from control_tts.utils.helpers import canonical_json, stable_hash

logger = logging.getLogger(__name__)

CORPUS_FORMAT = "control-tts-corpus"
CORPUS_VERSION = 1


class InvalidFileError(Exception):
    """Raised when file loading fails due to invalid format or content."""


def prepare_output_dir(path: str | Path, force: bool = False) -> Path:
    """Create an output directory, refusing to reuse a non-empty one.

    Args:
        path: Directory to create.
        force: Delete existing contents instead of refusing.

    Raises:
        FileExistsError: If the directory is non-empty and force is False.
    """
    directory = Path(path)
    if directory.exists() and any(directory.iterdir()):
        if not force:
            raise FileExistsError(f"{directory} is not empty (use --force to overwrite)")
        logger.warning("Overwriting contents of %s", directory)
        shutil.rmtree(directory)
    directory.mkdir(parents=True, exist_ok=True)
    return directory


def read_json(filename: str | Path) -> dict[str, Any]:
    """Read a JSON object from disk."""
    with open(filename, encoding="utf-8") as file:
        raw_data = file.read()

    try:
        data = json.loads(raw_data)
        if not isinstance(data, dict):
            raise InvalidFileError(f"{os.path.basename(filename)} does not contain a JSON object")
        return data
    except json.JSONDecodeError:
        raise InvalidFileError(f"{os.path.basename(filename)} is not a valid JSON file") from None


def write_json(data: dict[str, Any], filename: str | Path) -> None:
    """Write a JSON object to disk with sorted keys."""
    with open(filename, "w", encoding="utf-8") as file:
        file.write(json.dumps(data, indent=2, sort_keys=True, allow_nan=False))
        file.write("\n")


def write_jsonl(records: Iterable[dict[str, Any]], filename: str | Path) -> int:
    """Write records as line-delimited canonical JSON; returns the line count."""
    count = 0
    with open(filename, "w", encoding="utf-8") as file:
        for record in records:
            file.write(canonical_json(record))
            file.write("\n")
            count += 1
    return count


def append_jsonl(record: dict[str, Any], filename: str | Path) -> None:
    """Append one record to a line-delimited JSON file."""
    with open(filename, "a", encoding="utf-8") as file:
        file.write(canonical_json(record))
        file.write("\n")


def read_jsonl(filename: str | Path) -> list[dict[str, Any]]:
    """Read every record of a line-delimited JSON file.

    Raises:
        InvalidFileError: On a line that is not a JSON object.
    """
    records: list[dict[str, Any]] = []
    with open(filename, encoding="utf-8") as file:
        for line_no, line in enumerate(file, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError:
                raise InvalidFileError(
                    f"{os.path.basename(filename)}:{line_no} is not valid JSON"
                ) from None
            if not isinstance(record, dict):
                raise InvalidFileError(f"{os.path.basename(filename)}:{line_no} is not an object")
            records.append(record)
    return records


def split_path(directory: str | Path, split: str) -> Path:
    return Path(directory) / f"{split}{SPLIT_FILE_SUFFIX}"


def write_corpus(
    corpus: Corpus,
    toy_codec: ToyCodec,
    directory: str | Path,
    template_groups: dict[str, list[int]] | None = None,
    vocabulary: list[str] | None = None,
) -> dict[str, Any]:
    """Write every split and the manifest.

    Args:
        corpus: Generated corpus.
        toy_codec: Codec that generated it; its fixed tables go in the manifest.
        directory: Existing output directory.
        template_groups: Template ids per template group, recorded for
            split-hygiene checks.
        vocabulary: Prompt vocabulary words, so training encodes prompts
            exactly as the corpus was written.

    Returns:
        The manifest dictionary.
    """
    directory = Path(directory)
    splits: dict[str, Any] = {}
    for split, records in corpus.splits.items():
        path = split_path(directory, split)
        lines = [record.serialize() for record in records]
        write_jsonl(lines, path)
        splits[split] = {"n": len(lines), "sha256": stable_hash(lines)}
        logger.info("Wrote %d records to %s", len(lines), path)

    config = corpus.config
    manifest = {
        "format": CORPUS_FORMAT,
        "version": CORPUS_VERSION,
        "seed": config.seed,
        "dataset_config": config.serialize(),
        "layout": config.layout.serialize(),
        "categories": config.categories.serialize(),
        "tables": toy_codec.manifest_tables(),
        "speakers": {
            "train": list(config.train_speakers),
            "heldout": list(config.heldout_speakers),
        },
        "template_groups": template_groups or {},
        "vocabulary": vocabulary or [],
        "splits": splits,
    }
    write_json(manifest, directory / MANIFEST_FILE)
    return manifest


def read_manifest(directory: str | Path) -> dict[str, Any]:
    """Read and check a corpus manifest.

    Raises:
        InvalidFileError: If the manifest is missing or has the wrong format.
    """
    path = Path(directory) / MANIFEST_FILE
    if not path.exists():
        raise InvalidFileError(f"{directory} has no {MANIFEST_FILE}")
    manifest = read_json(path)
    if manifest.get("format") != CORPUS_FORMAT or manifest.get("version") != CORPUS_VERSION:
        raise InvalidFileError(
            f"{path} is not a {CORPUS_FORMAT} v{CORPUS_VERSION} manifest"
        )
    return manifest


def read_split(directory: str | Path, split: str, layout: ChannelLayout) -> list[SyntheticUtterance]:
    """Read one split back into utterances.

    Raises:
        InvalidFileError: If the split file is missing or a record is malformed.
    """
    path = split_path(directory, split)
    if not path.exists():
        raise InvalidFileError(f"split '{split}' not found in {directory}")
    utterances = []
    for line_no, record in enumerate(read_jsonl(path), start=1):
        try:
            utterances.append(SyntheticUtterance.deserialize(record, layout))
        except (KeyError, TypeError, ValueError) as e:
            logger.debug("Bad record at %s:%d", path, line_no, exc_info=True)
            raise InvalidFileError(f"{path.name}:{line_no} is not a valid utterance record") from e
    return utterances


def load_corpus(directory: str | Path, splits: Iterable[str] = SPLIT_NAMES) -> tuple[Corpus, dict[str, Any]]:
    """Load the requested splits and the manifest of a corpus directory."""
    manifest = read_manifest(directory)
    try:
        config = DatasetConfig.deserialize(manifest["dataset_config"])
    except (KeyError, TypeError, ValueError) as e:
        logger.debug("Bad dataset_config in %s", directory, exc_info=True)
        raise InvalidFileError(f"{directory}: manifest dataset_config is invalid") from e
    corpus = Corpus(config)
    for split in splits:
        corpus.splits[split] = read_split(directory, split, config.layout)
    return corpus, manifest
