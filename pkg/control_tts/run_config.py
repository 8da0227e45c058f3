"""Run configuration.

RunConfig aggregates the settings dataclasses of every module into one
versioned, hashable object. Values come, in increasing priority, from the
dataclass defaults, a YAML file, ``--set section.key=value`` overrides and
dedicated command-line flags. Merging and type checking go through an
OmegaConf structured config built from RunConfig itself, so unknown keys and
mistyped values fail before any section is validated. The resolved
configuration is written next to every artifact.

Example config file::

    schema_version: 1
    data:
      seed: 11
      n_train: 2000
    model:
      smsd:
        n_components: 7
        noise_mode: fully_factored

Author:
    Michael Economou

Date:
    2026-10-17
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import yaml
from omegaconf import DictConfig, OmegaConf
from omegaconf.errors import OmegaConfBaseException

from control_tts.core.codec import DatasetConfig
from control_tts.evaluation.ablation import AblationGrid
from control_tts.evaluation.control import EvalConfig
from control_tts.models.fusion import FusionConfig
from control_tts.models.generator import DecodeConfig, GeneratorConfig
from control_tts.models.smsd import SmsdConfig
from control_tts.models.tts import ModelConfig
from control_tts.prompts.bank import PromptConfig
from control_tts.training.trainer import TrainConfig
from control_tts.utils.helpers import stable_hash

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


class ConfigError(Exception):
    """Raised on invalid, unknown or inconsistent configuration values."""


@dataclass
class ModelSection:
    """Model settings that are not implied by the dataset."""

    d_prompt_embed: int = 64
    freeze_style_encoder: bool = False
    smsd: SmsdConfig = field(default_factory=SmsdConfig)
    generator: GeneratorConfig = field(default_factory=GeneratorConfig)
    fusion: FusionConfig = field(default_factory=FusionConfig)


def structured(base: RunConfig | type[RunConfig]) -> DictConfig:
    """Typed OmegaConf view of a configuration, open for merging.

    The frozen data and layout dataclasses come back read-only; merges must
    still be able to write them.
    """
    node = OmegaConf.structured(base)
    OmegaConf.set_readonly(node.data, False)
    OmegaConf.set_readonly(node.data.layout, False)
    return node


def build(base: RunConfig | type[RunConfig], *layers: Any) -> RunConfig:
    """Merge layers over a base configuration and instantiate the dataclasses.

    Raises:
        ConfigError: On unknown keys, mistyped values, a foreign schema
            version or values a dataclass rejects.
    """
    try:
        merged = OmegaConf.merge(structured(base), *layers)
        if merged.schema_version != SCHEMA_VERSION:
            raise ConfigError(
                f"unsupported schema_version {merged.schema_version}, expected {SCHEMA_VERSION}"
            )
        config = OmegaConf.to_object(merged)
    except OmegaConfBaseException as e:
        raise ConfigError(str(e).splitlines()[0] + _full_key(e)) from e
    except (TypeError, ValueError) as e:
        raise ConfigError(f"config: {e}") from e
    assert isinstance(config, RunConfig)
    return config


def _full_key(error: OmegaConfBaseException) -> str:
    key = getattr(error, "full_key", None)
    return f" (at '{key}')" if key else ""


@dataclass
class RunConfig:
    """Every setting of a run.

    Attributes:
        schema_version: Configuration format version.
        data: Corpus generator settings.
        prompts: Template bank selection.
        model: Model settings not implied by the data.
        train: Optimization settings.
        decode: Iterative decoding settings.
        eval: Evaluation sizes and seed.
        ablation: Ablation grid.
    """

    schema_version: int = SCHEMA_VERSION
    data: DatasetConfig = field(default_factory=DatasetConfig)
    prompts: PromptConfig = field(default_factory=PromptConfig)
    model: ModelSection = field(default_factory=ModelSection)
    train: TrainConfig = field(default_factory=TrainConfig)
    decode: DecodeConfig = field(default_factory=DecodeConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)
    ablation: AblationGrid = field(default_factory=AblationGrid)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> RunConfig:
        """Build a configuration from nested values over the defaults.

        Raises:
            ConfigError: On a foreign schema version or invalid values.
        """
        return build(cls, data)

    @classmethod
    def load(
        cls,
        path: str | Path | None = None,
        overrides: list[str] | None = None,
        seed: int | None = None,
    ) -> RunConfig:
        """Merge a YAML file, ``--set`` overrides and the seed flag, then resolve.

        Raises:
            ConfigError: On unreadable files or invalid values.
        """
        layers: list[Any] = []
        if path is not None:
            try:
                layers.append(OmegaConf.load(path))
            except (OSError, yaml.YAMLError) as e:
                raise ConfigError(f"cannot read config file {path}: {e}") from e
        if overrides:
            try:
                layers.append(OmegaConf.from_dotlist(list(overrides)))
            except (OmegaConfBaseException, yaml.YAMLError) as e:
                raise ConfigError(f"bad override in {overrides}: {e}") from e
        config = build(cls, *layers)
        if seed is not None:
            config = config.with_seed(seed)
        logger.debug("Loaded configuration from %s with %d override(s)", path, len(overrides or []))
        return config.resolve()

    def with_seed(self, seed: int) -> RunConfig:
        """Set the master seed of the corpus, training and evaluation."""
        return replace(
            self,
            data=replace(self.data, seed=seed),
            train=replace(self.train, seed=seed),
            eval=replace(self.eval, seed=seed),
        )

    def resolve(self) -> RunConfig:
        """Validate every section and their cross-section constraints.

        Raises:
            ConfigError: Naming the first failing check.
        """
        checks = [
            ("data", self.data.validate),
            ("prompts", self.prompts.validate),
            ("model.smsd", self.model.smsd.validate),
            ("model.generator", self.model.generator.validate),
            ("model.fusion", self.model.fusion.validate),
            ("train", self.train.validate),
            ("decode", self.decode.validate),
            ("eval", self.eval.validate),
            ("ablation", self.ablation.validate),
        ]
        for name, check in checks:
            try:
                check()
            except ValueError as e:
                raise ConfigError(f"{name}: {e}") from e
        if self.model.generator.max_positions < self.data.max_frames:
            raise ConfigError(
                f"model.generator.max_positions={self.model.generator.max_positions} "
                f"is below data.max_frames={self.data.max_frames}"
            )
        if self.model.d_prompt_embed < 1:
            raise ConfigError("model.d_prompt_embed must be positive")
        return self

    def model_config(self, prompt_vocab: int) -> ModelConfig:
        """Model configuration for a corpus with this data section."""
        return ModelConfig(
            text_vocab=self.data.text_vocab,
            prompt_vocab=prompt_vocab,
            d_style=self.data.d_style,
            d_timbre=self.data.d_timbre,
            d_prompt_embed=self.model.d_prompt_embed,
            freeze_style_encoder=self.model.freeze_style_encoder,
            layout=self.data.layout,
            smsd=replace(self.model.smsd),
            generator=replace(self.model.generator),
            fusion=replace(self.model.fusion),
        )

    def to_dict(self) -> dict[str, Any]:
        plain = OmegaConf.to_container(structured(self), resolve=True)
        assert isinstance(plain, dict)
        return plain

    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON of the configuration."""
        return stable_hash(self.to_dict())

    def with_overrides(self, values: dict[str, Any] | DictConfig) -> RunConfig:
        """Apply nested values on top of this configuration and resolve."""
        return build(self, values).resolve()
