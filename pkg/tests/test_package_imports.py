#!/usr/bin/env python
"""Basic import tests for the control_tts package.

Verifies that every layer imports without side effects and the public
names are exported where the README says they are.

Author:
    Michael Economou

Date:
    2026-10-17
"""

import importlib

import pytest

MODULES = [
    "control_tts.core.codec",
    "control_tts.core.corpus",
    "control_tts.core.labels",
    "control_tts.core.layout",
    "control_tts.core.style_extractor",
    "control_tts.prompts.bank",
    "control_tts.prompts.lexicon",
    "control_tts.models.smsd",
    "control_tts.models.noise_modes",
    "control_tts.models.registry",
    "control_tts.models.generator",
    "control_tts.models.fusion",
    "control_tts.models.tts",
    "control_tts.training.trainer",
    "control_tts.persistence.checkpoint",
    "control_tts.persistence.corpus_jsonl",
    "control_tts.evaluation.ablation",
    "control_tts.pipeline",
    "control_tts.run_config",
    "control_tts.cli",
]


class TestPackageImports:
    """Basic tests for control_tts package imports."""

    @pytest.mark.parametrize("name", MODULES)
    def test_module_imports(self, name):
        """Test that each module can be imported."""
        assert importlib.import_module(name) is not None

    def test_public_api(self):
        """Test that the top-level package exports its documented names."""
        import control_tts

        for name in control_tts.__all__:
            assert hasattr(control_tts, name), name
        assert control_tts.__version__ == "1.0.0"

    def test_core_is_torch_free(self):
        """Test that the core layer does not import torch."""
        import control_tts.core as core

        for module_name in ("codec", "corpus", "labels", "layout", "style_extractor"):
            module = importlib.import_module(f"control_tts.core.{module_name}")
            assert "torch" not in vars(module), module_name
        assert core.ToyCodec is not None

    def test_builtin_noise_modes_registered(self):
        """Test that importing the models registers all four noise modes."""
        from control_tts.models import NoiseMode, NoiseModeRegistry

        assert set(NoiseModeRegistry.get_all_modes()) == set(NoiseMode)
