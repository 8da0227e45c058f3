"""Style prompt text: template bank, lexicon and vocabulary.

Author:
    Michael Economou

Date:
    2026-10-17
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from control_tts.core.labels import AttributeLabels
from control_tts.prompts.bank import (
    OOV,
    PAD,
    PromptConfig,
    StylePrompt,
    Template,
    TemplateBank,
    Vocabulary,
    tokenize,
)
from control_tts.prompts.lexicon import LEXICON, keywords


@lru_cache(maxsize=1)
def default_bank() -> TemplateBank:
    """The packaged template bank, parsed once per process."""
    return TemplateBank.load()


def generate_style_prompts(
    labels: AttributeLabels,
    rng: np.random.Generator,
    n: int,
    group: str = "train",
    bank: TemplateBank | None = None,
) -> list[StylePrompt]:
    """Draw n distinct prompts for labels from a template bank (default: packaged)."""
    return (bank or default_bank()).generate_style_prompts(labels, rng, n, group)


__all__ = [
    "LEXICON",
    "OOV",
    "PAD",
    "PromptConfig",
    "StylePrompt",
    "Template",
    "TemplateBank",
    "Vocabulary",
    "default_bank",
    "generate_style_prompts",
    "keywords",
    "tokenize",
]
