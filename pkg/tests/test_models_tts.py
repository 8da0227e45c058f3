"""Tests for the composed model, the style-text encoder and the synthesis glue."""

import inspect

import numpy as np
import pytest
import torch

from control_tts.models import ControllableTTS, DecodeConfig, StyleTextEncoder, mixture_mean
from control_tts.pipeline import extract_timbre, pad_ids, synthesize_batch, torch_generator
from control_tts.training.data import collate

FAST_DECODE = DecodeConfig(iterations_first=2, iterations_rest=1)


@pytest.fixture
def model(tiny_model_config):
    torch.manual_seed(0)
    return ControllableTTS(tiny_model_config)


@pytest.fixture
def batch(context):
    return collate(context.prepared("train")[:4])


class TestStyleTextEncoder:
    """Test suite for StyleTextEncoder."""

    def test_padding_does_not_change_encoding(self):
        """Test extra padding leaves the style semantic vector unchanged."""
        torch.manual_seed(0)
        encoder = StyleTextEncoder(vocab_size=10, d_out=4, d_embed=8)
        short = encoder(torch.tensor([[3, 4, 5]]))
        padded = encoder(torch.tensor([[3, 4, 5, 0, 0]]))
        assert torch.allclose(short, padded, atol=1e-6)

    def test_word_order_invariance(self):
        """Test pooling ignores word order."""
        encoder = StyleTextEncoder(vocab_size=10, d_out=4, d_embed=8)
        assert torch.allclose(encoder(torch.tensor([[3, 4, 5]])), encoder(torch.tensor([[5, 3, 4]])), atol=1e-6)

    @pytest.mark.parametrize("ids", [[[0, 0, 0]], [[3, 10]], [[-1, 2]]])
    def test_invalid_prompts_rejected(self, ids):
        """Test empty prompts and out-of-range ids raise ValueError."""
        encoder = StyleTextEncoder(vocab_size=10, d_out=4)
        with pytest.raises(ValueError):
            encoder(torch.tensor(ids))


class TestControllableTTS:
    """Test suite for ControllableTTS."""

    def test_has_no_timbre_input(self):
        """Test neither training nor synthesis accept a timbre argument."""
        for method in (ControllableTTS.training_losses, ControllableTTS.synthesize):
            assert not any("timbre" in name for name in inspect.signature(method).parameters)

    def test_training_losses_are_finite_and_differentiable(self, model, batch):
        """Test the three loss terms are finite scalars with gradients."""
        losses = model.training_losses(
            batch.text_ids,
            batch.text_mask,
            batch.durations,
            batch.prompt_ids,
            batch.style,
            batch.codec,
            torch.Generator().manual_seed(0),
            torch.Generator().manual_seed(1),
        )
        for name in ("codec", "dur", "smsd"):
            assert losses[name].ndim == 0
            assert torch.isfinite(losses[name])
        assert int(losses["n_masked"]) >= 0
        (losses["codec"] + losses["dur"] + losses["smsd"]).backward()
        assert model.smsd.fc_means.weight.grad is not None
        assert model.style_encoder.embedding.weight.grad is not None

    def test_frozen_style_encoder(self, tiny_model_config):
        """Test freeze_style_encoder removes the encoder from the trainable set."""
        tiny_model_config.freeze_style_encoder = True
        frozen = ControllableTTS(tiny_model_config)
        assert not any(p.requires_grad for p in frozen.style_encoder.parameters())
        assert all(p.requires_grad for p in frozen.smsd.parameters())

    def test_invalid_config_rejected(self, tiny_model_config):
        """Test an unset prompt vocabulary fails validation."""
        tiny_model_config.prompt_vocab = 0
        with pytest.raises(ValueError, match="prompt_vocab"):
            ControllableTTS(tiny_model_config)

    def test_synthesize_shapes(self, model, batch):
        """Test synthesized tokens, masks and durations agree."""
        model.eval()
        result = model.synthesize(
            batch.text_ids, batch.text_mask, batch.prompt_ids, FAST_DECODE, torch.Generator().manual_seed(0)
        )
        assert result.tokens.shape[0] == len(batch)
        assert result.tokens.shape[2] == model.config.layout.n_channels
        assert result.frame_mask.sum(dim=1).tolist() == result.durations.sum(dim=1).tolist()
        assert bool((result.durations[batch.text_mask] >= 1).all())
        assert result.tokens.shape[1] <= model.config.generator.max_positions

    def test_deterministic_style_is_mixture_mean(self, model, batch):
        """Test deterministic synthesis feeds the analytic mixture mean."""
        model.eval()
        result = model.synthesize(
            batch.text_ids, batch.text_mask, batch.prompt_ids, FAST_DECODE, torch.Generator().manual_seed(0),
            deterministic_style=True,
        )
        with torch.no_grad():
            expected = mixture_mean(model.mixture(batch.prompt_ids))
        assert torch.allclose(result.style, expected)

    def test_pinned_style_skips_mixture(self, model, batch):
        """Test a pinned style is used as given and reports component -1."""
        model.eval()
        style = torch.randn(len(batch), model.config.d_style)
        result = model.synthesize(
            batch.text_ids, batch.text_mask, batch.prompt_ids, FAST_DECODE, torch.Generator().manual_seed(0),
            style=style,
        )
        assert torch.equal(result.style, style)
        assert result.components.tolist() == [-1] * len(batch)

    def test_same_generator_same_output(self, model, batch):
        """Test synthesis is a function of the generator state."""
        model.eval()
        runs = [
            model.synthesize(
                batch.text_ids, batch.text_mask, batch.prompt_ids, FAST_DECODE, torch.Generator().manual_seed(3)
            )
            for _ in range(2)
        ]
        assert torch.equal(runs[0].tokens, runs[1].tokens)
        assert torch.equal(runs[0].style, runs[1].style)


class TestPipeline:
    """Test suite for the synthesis helpers."""

    def test_pad_ids(self):
        """Test sequences are right-padded with zeros."""
        assert pad_ids([[1, 2, 3], [4]]).tolist() == [[1, 2, 3], [4, 0, 0]]

    def test_torch_generator_is_seeded_by_path(self):
        """Test generators of one path agree and of different paths differ."""
        a = torch.rand(3, generator=torch_generator(7, "eval", 0))
        b = torch.rand(3, generator=torch_generator(7, "eval", 0))
        c = torch.rand(3, generator=torch_generator(7, "eval", 1))
        assert torch.equal(a, b)
        assert not torch.equal(a, c)

    def test_synthesize_batch_decodes_every_sample(self, model, context, tiny_model_config):
        """Test each synthesized sample carries a decoded output."""
        from control_tts.models import CodecStage

        torch.manual_seed(0)
        stage = CodecStage(context.toy_codec.layout, tiny_model_config.d_timbre, tiny_model_config.fusion)
        bundle = context.bundle(model, stage).eval()
        records = context.corpus["test"][:3]
        samples = synthesize_batch(
            bundle,
            [u.content_tokens for u in records],
            [u.style_text for u in records],
            [u.timbre for u in records],
            torch.Generator().manual_seed(0),
            FAST_DECODE,
        )
        assert len(samples) == 3
        for sample, record in zip(samples, records, strict=True):
            assert sample.codec.n_frames == sum(sample.durations)
            assert len(sample.durations) == len(record.content_tokens)
            assert not sample.prompt_all_oov
            assert len(sample.output.content_tokens) == len(sample.output.durations)

        all_oov = synthesize_batch(
            bundle, [records[0].content_tokens], [["qwerty"]], [records[0].timbre],
            torch.Generator().manual_seed(0), FAST_DECODE,
        )
        assert all_oov[0].prompt_all_oov

        timbres = extract_timbre(bundle, [context.toy_codec.render_prompt_frames(u) for u in records])
        np.testing.assert_allclose(np.linalg.norm(timbres, axis=1), 1.0, atol=1e-9)
