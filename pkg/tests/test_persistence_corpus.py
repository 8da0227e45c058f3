"""Tests for JSON, JSONL and corpus directory persistence.

Author:
    Michael Economou

Date:
    2026-10-17
"""

import json

import pytest

from control_tts.constants import MANIFEST_FILE
from control_tts.core import SPLIT_NAMES
from control_tts.persistence import (
    InvalidFileError,
    append_jsonl,
    load_corpus,
    prepare_output_dir,
    read_json,
    read_jsonl,
    read_manifest,
    write_corpus,
    write_jsonl,
)


@pytest.fixture
def written(tmp_path, corpus, toy_codec, bank, vocabulary):
    groups = {g: sorted(bank.template_ids(g)) for g in ("train", "heldout")}
    manifest = write_corpus(corpus, toy_codec, tmp_path, groups, vocabulary.words)
    return tmp_path, manifest


class TestJsonFiles:
    """Test suite for the JSON and JSONL helpers."""

    def test_jsonl_round_trip_and_append(self, tmp_path):
        """Test written records read back in order, including appended ones."""
        path = tmp_path / "log.jsonl"
        assert write_jsonl([{"b": 1, "a": 2}, {"x": [1, 2]}], path) == 2
        append_jsonl({"step": 3}, path)
        assert read_jsonl(path) == [{"a": 2, "b": 1}, {"x": [1, 2]}, {"step": 3}]
        assert path.read_text(encoding="utf-8").splitlines()[0] == '{"a":2,"b":1}'

    @pytest.mark.parametrize("line", ["{not json", "[1, 2]"])
    def test_bad_jsonl_lines_rejected(self, tmp_path, line):
        """Test malformed lines and non-object lines raise InvalidFileError."""
        path = tmp_path / "bad.jsonl"
        path.write_text('{"ok": 1}\n' + line + "\n", encoding="utf-8")
        with pytest.raises(InvalidFileError, match=":2"):
            read_jsonl(path)

    def test_read_json_requires_object(self, tmp_path):
        """Test a JSON file holding a list or garbage raises InvalidFileError."""
        path = tmp_path / "x.json"
        path.write_text("[1]", encoding="utf-8")
        with pytest.raises(InvalidFileError):
            read_json(path)
        path.write_text("{", encoding="utf-8")
        with pytest.raises(InvalidFileError):
            read_json(path)


class TestPrepareOutputDir:
    """Test suite for prepare_output_dir."""

    def test_creates_missing_directory(self, tmp_path):
        """Test a new nested directory is created."""
        target = prepare_output_dir(tmp_path / "a" / "b")
        assert target.is_dir()

    def test_refuses_non_empty_directory(self, tmp_path):
        """Test a non-empty directory raises unless forced."""
        (tmp_path / "old.txt").write_text("x", encoding="utf-8")
        with pytest.raises(FileExistsError, match="--force"):
            prepare_output_dir(tmp_path)
        prepare_output_dir(tmp_path, force=True)
        assert list(tmp_path.iterdir()) == []


class TestCorpusDirectory:
    """Test suite for write_corpus and load_corpus."""

    def test_manifest_contents(self, written, corpus, vocabulary):
        """Test the manifest records config, tables, speakers, templates and split hashes."""
        directory, manifest = written
        assert read_manifest(directory) == manifest
        assert manifest["vocabulary"] == vocabulary.words
        assert set(manifest["splits"]) == set(SPLIT_NAMES)
        for split, info in manifest["splits"].items():
            assert info["n"] == len(corpus[split])
            assert len(info["sha256"]) == 64
        assert manifest["speakers"]["heldout"] == list(corpus.config.heldout_speakers)

    def test_load_restores_records(self, written, corpus):
        """Test loading gives records equal to the generated ones."""
        directory, _ = written
        loaded, _ = load_corpus(directory)
        assert loaded.config == corpus.config
        for split in SPLIT_NAMES:
            assert [u.serialize() for u in loaded[split]] == [u.serialize() for u in corpus[split]]

    def test_load_selected_splits(self, written):
        """Test only the requested splits are read."""
        directory, _ = written
        loaded, _ = load_corpus(directory, splits=["test"])
        assert set(loaded.splits) == {"test"}

    def test_writing_twice_is_byte_identical(self, written, corpus, toy_codec, tmp_path_factory):
        """Test two writes of one corpus give identical files."""
        directory, _ = written
        other = tmp_path_factory.mktemp("again")
        write_corpus(corpus, toy_codec, other, *self.groups_and_vocab(directory))
        for path in directory.iterdir():
            assert (other / path.name).read_bytes() == path.read_bytes()

    @staticmethod
    def groups_and_vocab(directory):
        manifest = read_manifest(directory)
        return manifest["template_groups"], manifest["vocabulary"]

    def test_missing_manifest_rejected(self, tmp_path):
        """Test a directory without a manifest raises InvalidFileError."""
        with pytest.raises(InvalidFileError, match=MANIFEST_FILE):
            load_corpus(tmp_path)

    def test_foreign_manifest_rejected(self, written):
        """Test a manifest of another format raises InvalidFileError."""
        directory, manifest = written
        manifest["version"] = 99
        (directory / MANIFEST_FILE).write_text(json.dumps(manifest), encoding="utf-8")
        with pytest.raises(InvalidFileError):
            read_manifest(directory)

    def test_corrupt_record_rejected(self, written):
        """Test a record with a missing field names its file and line."""
        directory, _ = written
        path = directory / "test.jsonl"
        lines = path.read_text(encoding="utf-8").splitlines()
        record = json.loads(lines[1])
        del record["codec"]
        lines[1] = json.dumps(record)
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        with pytest.raises(InvalidFileError, match="test.jsonl:2"):
            load_corpus(directory, splits=["test"])

    def test_missing_split_rejected(self, written):
        """Test asking for a split without a file raises InvalidFileError."""
        directory, _ = written
        (directory / "test.jsonl").unlink()
        with pytest.raises(InvalidFileError, match="test"):
            load_corpus(directory, splits=["test"])
