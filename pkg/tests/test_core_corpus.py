"""Tests for corpus split generation.

Author:
    Michael Economou

Date:
    2026-10-17
"""

from control_tts.core import SPLIT_NAMES, generate_corpus, generate_split
from control_tts.core.corpus import generate_record


class TestGenerateCorpus:
    """Test suite for generate_corpus and its splits."""

    def test_split_sizes_follow_config(self, corpus, small_config):
        """Test every split has the configured number of records."""
        assert set(corpus.splits) == set(SPLIT_NAMES)
        assert corpus.sizes() == small_config.split_sizes

    def test_heldout_speakers_only_in_heldout_split(self, corpus, small_config):
        """Test heldout speakers never appear outside the heldout-speaker split."""
        heldout = set(small_config.heldout_speakers)
        for split in SPLIT_NAMES:
            speakers = {u.speaker_id for u in corpus[split]}
            if split == "heldout_speaker":
                assert speakers <= heldout
            else:
                assert not speakers & heldout

    def test_heldout_templates_only_in_heldout_style(self, corpus, bank):
        """Test heldout templates are used exactly by the heldout-style split."""
        heldout = bank.template_ids("heldout")
        for split in SPLIT_NAMES:
            templates = {u.template_id for u in corpus[split]}
            if split == "heldout_style":
                assert templates <= heldout
            else:
                assert not templates & heldout

    def test_records_regenerate_individually(self, corpus, toy_codec, bank):
        """Test any record can be regenerated from its split and index."""
        source = bank.prompt_source("train")
        record = generate_record(toy_codec, "test", 3, source)
        assert record.serialize() == corpus["test"][3].serialize()

    def test_same_seed_same_corpus(self, toy_codec):
        """Test two generations with plain prompts are identical."""
        a = generate_split(toy_codec, "train", 5)
        b = generate_split(toy_codec, "train", 5)
        assert [u.serialize() for u in a] == [u.serialize() for u in b]

    def test_plain_prompts_without_bank(self, toy_codec):
        """Test a corpus without a template bank uses keyword prompts."""
        corpus = generate_corpus(toy_codec.with_config(n_train=2, n_test=0, n_heldout_style=0, n_heldout_speaker=0, n_many_to_many=0))
        (first, _) = corpus["train"]
        assert first.template_id is None
        assert first.labels.gender in first.style_text

    def test_iteration_covers_all_splits(self, corpus):
        """Test iterating a corpus yields every record once."""
        assert len(list(corpus)) == sum(corpus.sizes().values())

    def test_unknown_split_raises(self, corpus):
        """Test looking up a missing split raises KeyError."""
        import pytest

        with pytest.raises(KeyError):
            corpus["dev"]
