"""Tests for the synthetic codec.

Covers configuration validation, utterance synthesis, exact attribute and
content decoding and the lenient decoder used on generated codecs.

Author:
    Michael Economou

Date:
    2026-10-17
"""

from dataclasses import replace

import numpy as np
import pytest

from control_tts.core import (
    STYLE_ATTRIBUTES,
    AttributeLabels,
    ChannelLayout,
    CodecMatrix,
    Degrees,
    ToyCodec,
    UnknownPatternError,
    join_style,
    make_generator_config,
    quantize_degree,
    split_style,
)


class TestMakeGeneratorConfig:
    """Test suite for make_generator_config."""

    def test_default_layout_has_six_channels(self):
        """Test the default layout partitions six channels 2/1/3."""
        config = make_generator_config(seed=7, n_speakers=20, text_vocab=40)
        assert config.layout.n_channels == 6
        assert (config.layout.n_content, config.layout.n_prosody, config.layout.n_acoustic) == (2, 1, 3)

    def test_same_seed_gives_identical_configs(self):
        """Test two calls with the same arguments serialize identically."""
        a = make_generator_config(seed=7, n_speakers=20, text_vocab=40)
        b = make_generator_config(seed=7, n_speakers=20, text_vocab=40)
        assert a == b
        assert a.serialize() == b.serialize()

    @pytest.mark.parametrize("n_speakers,text_vocab", [(0, 40), (20, 0), (-1, 40)])
    def test_non_positive_counts_rejected(self, n_speakers, text_vocab):
        """Test non-positive speaker or vocabulary counts raise ValueError."""
        with pytest.raises(ValueError):
            make_generator_config(seed=7, n_speakers=n_speakers, text_vocab=text_vocab)

    def test_codebook_too_small_rejected(self):
        """Test a codebook that cannot hold the style codes is rejected."""
        with pytest.raises(ValueError, match="codebook_size"):
            make_generator_config(
                seed=7, n_speakers=20, text_vocab=10, layout=ChannelLayout(codebook_size=16)
            )

    def test_serialize_round_trip(self, small_config):
        """Test deserialize(serialize(config)) gives an equal config."""
        from control_tts.core import DatasetConfig

        assert DatasetConfig.deserialize(small_config.serialize()) == small_config


class TestChannelLayout:
    """Test suite for ChannelLayout and CodecMatrix."""

    def test_style_is_prosody_then_acoustic(self):
        """Test split_style concatenates prosody and acoustic channels in order."""
        layout = ChannelLayout()
        tokens = np.tile(np.arange(6), (3, 1))
        content, style = split_style(CodecMatrix(tokens, layout))
        assert content.tolist() == [[0, 1]] * 3
        assert style.tolist() == [[2, 3, 4, 5]] * 3
        assert join_style(content, style, layout) == CodecMatrix(tokens, layout)

    def test_out_of_range_tokens_rejected(self):
        """Test tokens outside the codebook raise ValueError."""
        with pytest.raises(ValueError):
            CodecMatrix(np.full((2, 6), 64), ChannelLayout())

    def test_wrong_channel_count_rejected(self):
        """Test a token grid with the wrong width raises ValueError."""
        with pytest.raises(ValueError):
            CodecMatrix(np.zeros((2, 5)), ChannelLayout())


class TestSynthUtterance:
    """Test suite for ToyCodec.synth_utterance."""

    def test_decode_attributes_inverts_labels(self, toy_codec):
        """Test decode_attributes recovers labels and degrees for many utterances."""
        rng = np.random.default_rng(0)
        for _ in range(300):
            u = toy_codec.synth_utterance(rng)
            labels, degrees = toy_codec.decode_attributes(u.codec)
            assert labels == u.labels
            assert degrees.as_list() == pytest.approx(u.degrees.as_list())

    def test_durations_sum_to_frames(self, toy_codec):
        """Test sum(durations) equals the number of codec frames."""
        rng = np.random.default_rng(1)
        for _ in range(50):
            u = toy_codec.synth_utterance(rng)
            assert sum(u.durations) == u.codec.n_frames
            assert min(u.durations) >= 1
            assert u.codec.n_frames <= toy_codec.config.max_frames

    def test_fast_speech_is_shorter_than_slow(self, toy_codec):
        """Test fast utterances of one text have fewer frames per phoneme than slow ones."""
        rng = np.random.default_rng(4)
        text = np.array([1, 5, 9, 3, 7])
        base = AttributeLabels("female", "normal", "normal", "normal", "neutral")
        mean_frames = {}
        for speed in ("fast", "slow"):
            labels = replace(base, speed=speed)
            utterances = [
                toy_codec.synth_utterance(rng, labels=labels, content_tokens=text) for _ in range(100)
            ]
            mean_frames[speed] = np.mean([np.mean(u.durations) for u in utterances])
        assert mean_frames["fast"] < mean_frames["slow"]

    def test_same_rng_state_gives_same_utterance(self, toy_codec):
        """Test synthesis is a function of the generator state."""
        a = toy_codec.synth_utterance(np.random.default_rng(5))
        b = toy_codec.synth_utterance(np.random.default_rng(5))
        assert a.serialize() == b.serialize()

    def test_timbre_is_unit_and_speaker_clustered(self, toy_codec):
        """Test timbre vectors are unit norm and near their speaker centroid."""
        rng = np.random.default_rng(2)
        for speaker in range(toy_codec.config.n_speakers):
            u = toy_codec.synth_utterance(rng, speaker_id=speaker)
            assert np.linalg.norm(u.timbre) == pytest.approx(1.0)
            centroid = toy_codec.speaker_timbre(speaker)
            assert float(u.timbre @ centroid) > 0.95

    def test_degrees_of_one_label_give_distinct_patterns(self, toy_codec, rng):
        """Test two degrees of the same label map to different style tokens."""
        labels = toy_codec.sample_labels(rng, 0)
        low = Degrees({name: 0.1 for name in ("pitch", "speed", "energy", "emotion")})
        high = Degrees({name: 0.8 for name in ("pitch", "speed", "energy", "emotion")})
        content = np.array([1, 2, 3])
        a = toy_codec.synth_utterance(np.random.default_rng(0), labels=labels, degrees=low, content_tokens=content)
        b = toy_codec.synth_utterance(np.random.default_rng(0), labels=labels, degrees=high, content_tokens=content)
        _, style_a = split_style(a.codec)
        _, style_b = split_style(b.codec)
        assert not np.array_equal(style_a, style_b)
        assert toy_codec.decode_attributes(a.codec)[0] == toy_codec.decode_attributes(b.codec)[0]

    def test_gender_follows_speaker(self, toy_codec, rng):
        """Test drawn labels carry the speaker's gender."""
        for speaker in range(4):
            u = toy_codec.synth_utterance(rng, speaker_id=speaker)
            assert u.labels.gender == toy_codec.speaker_gender(speaker)

    def test_unknown_speaker_rejected(self, toy_codec, rng):
        """Test a speaker id outside the corpus raises ValueError."""
        with pytest.raises(ValueError, match="Unknown speaker"):
            toy_codec.synth_utterance(rng, speaker_id=toy_codec.config.n_speakers)

    def test_invalid_label_rejected(self, toy_codec, rng):
        """Test a label outside its category domain raises ValueError."""
        labels = AttributeLabels("male", "low", "slow", "low", "bored")
        with pytest.raises(ValueError):
            toy_codec.synth_utterance(rng, labels=labels)

    def test_no_channel_encodes_timbre(self, toy_codec):
        """Test two speakers with identical labels and text share the codec."""
        labels = AttributeLabels("male", "high", "fast", "low", "happy")
        degrees = Degrees({"pitch": 0.3, "speed": 0.5, "energy": 0.0, "emotion": 0.9})
        content = np.array([4, 5, 6, 7])
        # Speakers 0 and 2 are both male with the default two genders.
        a = toy_codec.synth_utterance(np.random.default_rng(3), 0, labels, degrees, content)
        b = toy_codec.synth_utterance(np.random.default_rng(3), 2, labels, degrees, content)
        assert a.codec == b.codec
        assert not np.allclose(a.timbre, b.timbre)


class TestDecoding:
    """Test suite for strict and lenient decoders."""

    def test_decode_content_recovers_text_and_durations(self, toy_codec):
        """Test decode_content inverts the content channels."""
        rng = np.random.default_rng(4)
        for _ in range(50):
            u = toy_codec.synth_utterance(rng)
            content, durations = toy_codec.decode_content(u.codec)
            assert content == list(u.content_tokens)
            assert durations == list(u.durations)

    def test_invalid_style_token_raises(self, toy_codec, rng):
        """Test token 0 in a style channel is an unknown pattern."""
        u = toy_codec.synth_utterance(rng)
        tokens = u.codec.tokens.copy()
        tokens[:, toy_codec.layout.n_content] = 0
        with pytest.raises(UnknownPatternError):
            toy_codec.decode_attributes(CodecMatrix(tokens, toy_codec.layout))

    def test_inconsistent_style_channel_raises(self, toy_codec, rng):
        """Test a style channel that changes across frames is rejected."""
        u = toy_codec.synth_utterance(rng)
        tokens = u.codec.tokens.copy()
        column = toy_codec.layout.n_content + 1
        tokens[0, column] = tokens[0, column] % 20 + 1 if tokens[0, column] != 1 else 2
        with pytest.raises(UnknownPatternError):
            toy_codec.decode_attributes(CodecMatrix(tokens, toy_codec.layout))

    def test_read_attributes_majority_vote(self, toy_codec, rng):
        """Test the lenient decoder ignores a minority of corrupted frames."""
        u = toy_codec.synth_utterance(rng, content_tokens=np.arange(6))
        tokens = u.codec.tokens.copy()
        tokens[0, toy_codec.layout.n_content :] = 0
        readings = toy_codec.read_attributes(CodecMatrix(tokens, toy_codec.layout))
        for name in STYLE_ATTRIBUTES:
            assert readings[name][0] == u.labels.get(name)

    def test_read_attributes_none_without_valid_token(self, toy_codec, rng):
        """Test attributes with no valid token read as None."""
        u = toy_codec.synth_utterance(rng)
        tokens = u.codec.tokens.copy()
        tokens[:, toy_codec.layout.n_content :] = 0
        readings = toy_codec.read_attributes(CodecMatrix(tokens, toy_codec.layout))
        assert all(readings[name] is None for name in STYLE_ATTRIBUTES)

    def test_lenient_content_decode_marks_invalid(self, toy_codec, rng):
        """Test decode_content in lenient mode reads invalid phonemes as -1."""
        u = toy_codec.synth_utterance(rng)
        tokens = u.codec.tokens.copy()
        tokens[:, 0] = 0
        content, durations = toy_codec.decode_content(CodecMatrix(tokens, toy_codec.layout), strict=False)
        assert set(content) == {-1}
        assert sum(durations) == u.codec.n_frames
        with pytest.raises(UnknownPatternError):
            toy_codec.decode_content(CodecMatrix(tokens, toy_codec.layout))

    def test_layout_mismatch_rejected(self, toy_codec, rng):
        """Test decoding a codec of another layout raises ValueError."""
        other = ChannelLayout(n_content=1, n_prosody=2, n_acoustic=3)
        with pytest.raises(ValueError):
            toy_codec.decode_attributes(CodecMatrix(np.ones((3, 6)), other))


class TestTablesAndDegrees:
    """Test suite for fixed tables and the degree grid."""

    def test_quantize_degree_bins(self):
        """Test degrees map to floor(degree * bins)."""
        assert quantize_degree(0.0, 10) == 0
        assert quantize_degree(0.35, 10) == 3
        assert quantize_degree(0.999, 10) == 9
        with pytest.raises(ValueError):
            quantize_degree(1.0, 10)

    def test_manifest_tables_cover_every_attribute(self, toy_codec):
        """Test the manifest tables describe every attribute and speaker."""
        tables = toy_codec.manifest_tables()
        assert set(tables["style_patterns"]) == set(STYLE_ATTRIBUTES)
        assert len(tables["speaker_genders"]) == toy_codec.config.n_speakers
        assert len(tables["base_durations"]) == toy_codec.config.text_vocab

    def test_prompt_frames_shape(self, toy_codec, rng):
        """Test speech prompt frames have one d_t row per codec frame."""
        u = toy_codec.synth_utterance(rng)
        frames = toy_codec.render_prompt_frames(u)
        assert frames.shape == (u.codec.n_frames, toy_codec.config.d_timbre)

    def test_with_config_rebuilds_codec(self, toy_codec):
        """Test with_config returns a codec for the modified configuration."""
        other = toy_codec.with_config(seed=8)
        assert isinstance(other, ToyCodec)
        assert other.config.seed == 8
        assert not np.allclose(other.speaker_timbre(0), toy_codec.speaker_timbre(0))
