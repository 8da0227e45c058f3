"""Persistence adapters (files only live here).

Author:
    Michael Economou

Date:
    2026-10-17
"""

from control_tts.persistence.checkpoint import (
    CHECKPOINT_HEADER,
    CheckpointMismatchError,
    load_checkpoint,
    payload_digest,
    read_checkpoint,
    restore_state,
    save_checkpoint,
)
from control_tts.persistence.corpus_jsonl import (
    InvalidFileError,
    append_jsonl,
    load_corpus,
    prepare_output_dir,
    read_json,
    read_jsonl,
    read_manifest,
    read_split,
    write_corpus,
    write_json,
    write_jsonl,
)

__all__ = [
    "CHECKPOINT_HEADER",
    "CheckpointMismatchError",
    "InvalidFileError",
    "append_jsonl",
    "load_checkpoint",
    "load_corpus",
    "payload_digest",
    "prepare_output_dir",
    "read_checkpoint",
    "read_json",
    "read_jsonl",
    "read_manifest",
    "read_split",
    "restore_state",
    "save_checkpoint",
    "write_corpus",
    "write_json",
    "write_jsonl",
]
