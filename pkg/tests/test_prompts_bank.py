"""Tests for the template bank, style prompts and vocabulary."""

import numpy as np
import pytest

from control_tts.core import STYLE_ATTRIBUTES, AttributeLabels
from control_tts.prompts import (
    LEXICON,
    OOV,
    PAD,
    PromptConfig,
    StylePrompt,
    TemplateBank,
    Vocabulary,
    generate_style_prompts,
    keywords,
    tokenize,
)

LABELS = AttributeLabels("female", "high", "slow", "low", "sad")


class TestTokenize:
    """Test suite for tokenize and StylePrompt."""

    def test_lowercases_and_keeps_hyphens(self):
        """Test words are lowercased and hyphenated words stay whole."""
        assert tokenize("A High-Pitched, SAD voice!") == ["a", "high-pitched", "sad", "voice"]

    def test_from_text_requires_a_word(self):
        """Test a prompt without words raises ValueError."""
        with pytest.raises(ValueError):
            StylePrompt.from_text("  ,;  ")

    def test_serialize_round_trip(self):
        """Test StylePrompt survives serialization."""
        prompt = StylePrompt(("a", "calm", "voice"), 3)
        assert StylePrompt.deserialize(prompt.serialize()) == prompt


class TestGenerateStylePrompts:
    """Test suite for generate_style_prompts."""

    def test_prompts_are_distinct_and_describe_labels(self, rng):
        """Test n distinct prompts each contain a keyword of every label."""
        prompts = generate_style_prompts(LABELS, rng, 8)
        assert len({p.tokens for p in prompts}) == 8
        for prompt in prompts:
            for name in STYLE_ATTRIBUTES:
                assert set(keywords(name, LABELS.get(name))) & set(prompt.tokens)

    def test_group_selects_templates(self, rng, bank):
        """Test heldout prompts come only from heldout templates."""
        prompts = generate_style_prompts(LABELS, rng, 5, group="heldout", bank=bank)
        assert {p.template_id for p in prompts} <= bank.template_ids("heldout")

    def test_n_below_one_rejected(self, rng):
        """Test n < 1 raises ValueError."""
        with pytest.raises(ValueError):
            generate_style_prompts(LABELS, rng, 0)

    def test_impossible_count_rejected(self, rng):
        """Test asking for more distinct prompts than the bank can make raises ValueError."""
        bank = TemplateBank.parse(
            "train | {gender} {pitch} {speed} {energy} {emotion}\n"
            "heldout | {emotion} {energy} {speed} {pitch} {gender}\n"
        )
        with pytest.raises(ValueError, match="distinct"):
            bank.generate_style_prompts(LABELS, rng, 300)

    def test_same_rng_same_prompts(self):
        """Test prompt drawing is a function of the generator state."""
        a = generate_style_prompts(LABELS, np.random.default_rng(3), 4)
        b = generate_style_prompts(LABELS, np.random.default_rng(3), 4)
        assert a == b


class TestTemplateBank:
    """Test suite for template bank parsing and the vocabulary."""

    def test_packaged_bank_has_both_groups(self, bank):
        """Test the packaged bank has train and heldout templates."""
        assert bank.group("train")
        assert bank.group("heldout")
        assert not bank.template_ids("train") & bank.template_ids("heldout")

    @pytest.mark.parametrize(
        "text",
        [
            "train {gender} {pitch} {speed} {energy} {emotion}",
            "dev | {gender} {pitch} {speed} {energy} {emotion}",
            "train | {gender} {pitch} {speed} {energy}",
            "train | {gender} {pitch} {speed} {energy} {emotion}",
        ],
    )
    def test_malformed_banks_rejected(self, text):
        """Test malformed lines, unknown tags, missing placeholders and missing groups raise."""
        with pytest.raises(ValueError):
            TemplateBank.parse(text)

    def test_vocabulary_reserves_pad_and_oov(self, vocabulary):
        """Test <pad> is id 0, <oov> id 1 and unknown words map to <oov>."""
        assert vocabulary.words[:2] == [PAD, OOV]
        assert vocabulary.encode(["sad", "zzz"]) == [vocabulary.encode(["sad"])[0], vocabulary.oov_id]
        assert vocabulary.is_all_oov(["qwerty", "zzz"])
        assert not vocabulary.is_all_oov(["qwerty", "sad"])

    def test_vocabulary_covers_lexicon(self, vocabulary):
        """Test every lexicon keyword is in the vocabulary."""
        for table in LEXICON.values():
            for words in table.values():
                assert all(word in vocabulary for word in words)

    def test_vocabulary_rebuilds_from_words(self, vocabulary):
        """Test Vocabulary(words) reproduces the same id assignment."""
        assert Vocabulary(vocabulary.words).words == vocabulary.words

    def test_heldout_only_fillers_are_oov(self, bank, vocabulary):
        """Test filler words seen only in heldout templates are out of vocabulary."""
        assert "imagine" not in vocabulary
        assert "imagine" in " ".join(t.text for t in bank.group("heldout"))

    def test_prompt_config_loads_file(self, tmp_path):
        """Test PromptConfig loads a custom template file and validates its path."""
        path = tmp_path / "bank.txt"
        path.write_text(
            "train | {gender} {pitch} {speed} {energy} {emotion}\n"
            "heldout | {emotion} {energy} {speed} {pitch} {gender}\n",
            encoding="utf-8",
        )
        config = PromptConfig(template_file=str(path))
        config.validate()
        assert len(config.load_bank().templates) == 2
        with pytest.raises(ValueError):
            PromptConfig(template_file=str(tmp_path / "missing.txt")).validate()
