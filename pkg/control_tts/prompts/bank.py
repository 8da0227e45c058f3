"""Template bank, style prompts and prompt vocabulary.

Style prompts are produced by filling attribute placeholders of a template
with lexicon keywords. The template bank is a plain-text resource with one
``<split> | <template>`` line per template; heldout templates never reach the
training split and emulate out-of-domain style descriptions.

Key Responsibilities:
    - Loading and validating the template bank resource
    - Rendering labels into StylePrompt objects (generate_style_prompts)
    - Tokenization and the <pad>/<oov> vocabulary

Author:
    Michael Economou

Date:
    2026-10-17
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

from control_tts.core.codec import PromptSource
from control_tts.core.labels import STYLE_ATTRIBUTES, AttributeLabels
from control_tts.core.serializable import Serializable
from control_tts.prompts.lexicon import all_keywords, keywords

logger = logging.getLogger(__name__)

PAD = "<pad>"
OOV = "<oov>"
TEMPLATE_GROUPS: tuple[str, ...] = ("train", "heldout")

_WORD_RE = re.compile(r"[a-z]+(?:-[a-z]+)*")
_PLACEHOLDER_RE = re.compile(r"\{(\w+)\}")


def tokenize(text: str) -> list[str]:
    """Lowercase word tokenization; hyphenated words stay one token."""
    return _WORD_RE.findall(text.lower())


@dataclass(frozen=True)
class StylePrompt(Serializable):
    """A tokenized style description.

    Attributes:
        tokens: Word sequence.
        template_id: Generating template, None for free text.
    """

    tokens: tuple[str, ...]
    template_id: int | None = None

    def __post_init__(self) -> None:
        if not self.tokens:
            raise ValueError("StylePrompt must have at least one token")

    @classmethod
    def from_text(cls, text: str) -> StylePrompt:
        """Build a prompt from free text.

        Raises:
            ValueError: If the text contains no word.
        """
        return cls(tuple(tokenize(text)))

    @property
    def text(self) -> str:
        return " ".join(self.tokens)

    def serialize(self) -> dict[str, Any]:
        return {"tokens": list(self.tokens), "template_id": self.template_id}

    @classmethod
    def deserialize(cls, data: dict[str, Any]) -> StylePrompt:
        template_id = data.get("template_id")
        return cls(tuple(data["tokens"]), None if template_id is None else int(template_id))


@dataclass(frozen=True)
class Template:
    """One line of the template bank."""

    template_id: int
    group: str
    text: str

    def render(self, words: dict[str, str]) -> list[str]:
        return tokenize(self.text.format(**words))


class Vocabulary:
    """Word to id map with reserved <pad> (0) and <oov> (1) entries."""

    def __init__(self, words: list[str]) -> None:
        self.words: list[str] = [PAD, OOV]
        for word in words:
            if word not in self.words:
                self.words.append(word)
        self._index = {word: i for i, word in enumerate(self.words)}

    @property
    def pad_id(self) -> int:
        return 0

    @property
    def oov_id(self) -> int:
        return 1

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: str) -> bool:
        return word in self._index

    def encode(self, tokens: tuple[str, ...] | list[str]) -> list[int]:
        """Map words to ids; unknown words become the <oov> id."""
        return [self._index.get(word, self.oov_id) for word in tokens]

    def is_all_oov(self, tokens: tuple[str, ...] | list[str]) -> bool:
        return all(i == self.oov_id for i in self.encode(tokens))


class TemplateBank:
    """Parsed template bank.

    Attributes:
        templates: All templates, indexed by template_id.
    """

    def __init__(self, templates: list[Template]) -> None:
        if not templates:
            raise ValueError("Template bank is empty")
        self.templates = templates
        for group in TEMPLATE_GROUPS:
            if not self.group(group):
                raise ValueError(f"Template bank has no '{group}' templates")

    @classmethod
    def parse(cls, text: str) -> TemplateBank:
        """Parse template bank text.

        Raises:
            ValueError: On malformed lines, unknown split tags or templates
                missing an attribute placeholder.
        """
        templates: list[Template] = []
        for line_no, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            group, sep, body = (part.strip() for part in line.partition("|"))
            if not sep or not body:
                raise ValueError(f"Template line {line_no}: expected '<split> | <template>'")
            if group not in TEMPLATE_GROUPS:
                raise ValueError(f"Template line {line_no}: unknown split tag '{group}'")
            placeholders = set(_PLACEHOLDER_RE.findall(body))
            if placeholders != set(STYLE_ATTRIBUTES):
                raise ValueError(
                    f"Template line {line_no}: placeholders {sorted(placeholders)} "
                    f"must be exactly {sorted(STYLE_ATTRIBUTES)}"
                )
            templates.append(Template(len(templates), group, body))
        return cls(templates)

    @classmethod
    def load(cls, path: str | Path | None = None) -> TemplateBank:
        """Load a template bank file, or the packaged default when path is None."""
        if path is None:
            text = resources.files("control_tts.prompts").joinpath("templates.txt").read_text(
                encoding="utf-8"
            )
        else:
            text = Path(path).read_text(encoding="utf-8")
        bank = cls.parse(text)
        logger.debug("Loaded %d style templates", len(bank.templates))
        return bank

    def group(self, name: str) -> list[Template]:
        return [t for t in self.templates if t.group == name]

    def template_ids(self, name: str) -> set[int]:
        return {t.template_id for t in self.group(name)}

    def vocabulary(self) -> Vocabulary:
        """Vocabulary of training-template words plus the full lexicon.

        Filler words that only occur in heldout templates are left out and
        read as <oov>.
        """
        words: list[str] = []
        for template in self.group("train"):
            words.extend(tokenize(_PLACEHOLDER_RE.sub(" ", template.text)))
        words.extend(all_keywords())
        return Vocabulary(words)

    def render(
        self, template: Template, labels: AttributeLabels, rng: np.random.Generator
    ) -> StylePrompt:
        words = {}
        for name in STYLE_ATTRIBUTES:
            variants = keywords(name, labels.get(name))
            words[name] = variants[int(rng.integers(len(variants)))]
        return StylePrompt(tuple(template.render(words)), template.template_id)

    def generate_style_prompts(
        self,
        labels: AttributeLabels,
        rng: np.random.Generator,
        n: int,
        group: str = "train",
    ) -> list[StylePrompt]:
        """Draw n distinct prompts describing labels.

        Args:
            labels: Attribute labels every prompt must describe.
            rng: Generator consumed by the draws.
            n: Number of prompts, at least 1.
            group: Template group, "train" or "heldout".

        Returns:
            n distinct StylePrompt objects from templates of the group.

        Raises:
            ValueError: If n < 1 or the group cannot produce n distinct prompts.
        """
        if n < 1:
            raise ValueError(f"n must be >= 1, got {n}")
        templates = self.group(group)
        if not templates:
            raise ValueError(f"Unknown template group '{group}'")
        prompts: list[StylePrompt] = []
        seen: set[tuple[str, ...]] = set()
        attempts = 0
        while len(prompts) < n:
            attempts += 1
            if attempts > 100 * n:
                raise ValueError(f"Cannot draw {n} distinct prompts from group '{group}'")
            template = templates[int(rng.integers(len(templates)))]
            prompt = self.render(template, labels, rng)
            if prompt.tokens not in seen:
                seen.add(prompt.tokens)
                prompts.append(prompt)
        return prompts

    def prompt_source(self, group: str) -> PromptSource:
        """Prompt source for corpus generation drawing one prompt per utterance."""

        def source(labels: AttributeLabels, rng: np.random.Generator) -> tuple[list[str], int | None]:
            (prompt,) = self.generate_style_prompts(labels, rng, 1, group)
            return list(prompt.tokens), prompt.template_id

        return source


@dataclass
class PromptConfig:
    """Style prompt settings.

    Attributes:
        template_file: Template bank file; empty selects the packaged bank.
    """

    template_file: str = ""

    def validate(self) -> None:
        if self.template_file and not Path(self.template_file).is_file():
            raise ValueError(f"template_file '{self.template_file}' does not exist")

    def load_bank(self) -> TemplateBank:
        return TemplateBank.load(self.template_file or None)
