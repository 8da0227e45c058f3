"""Attribute-control and many-to-many evaluation.

eval_control synthesizes every record of a split from its own style prompt
and text, fuses the timbre extracted from the record's speech prompt, and
scores the lenient oracle decode against the prompted labels.
eval_many_to_many holds one prompt fixed and synthesizes many samples to
measure how much the decoded degrees vary and which mixture components
were used.

All scores are exact functions of generated tokens and embeddings.

Author:
    Michael Economou

Date:
    2026-10-17
"""

from __future__ import annotations

import logging
from collections import Counter
from collections.abc import Sequence
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from control_tts.core.codec import SyntheticUtterance, ToyCodec
from control_tts.core.corpus import Corpus
from control_tts.core.labels import GRADED_ATTRIBUTES, STYLE_ATTRIBUTES, AttributeLabels
from control_tts.core.layout import CodecMatrix
from control_tts.core.serializable import Serializable
from control_tts.evaluation.metrics import (
    attribute_hits,
    entropy,
    speaker_auc,
    standard_error,
    token_error_rate,
    wilson_interval,
)
from control_tts.models.generator import DecodeConfig
from control_tts.pipeline import ModelBundle, SynthesizedSample, extract_timbre, synthesize_batch, torch_generator
from control_tts.utils.helpers import stable_hash

logger = logging.getLogger(__name__)

ARM_SMSD = "smsd"
ARM_DETERMINISTIC = "deterministic"
ARM_ORACLE = "oracle"


@dataclass
class EvalConfig:
    """Evaluation settings.

    Attributes:
        n: Records scored per split (all when larger than the split).
        n_styles: Fixed prompts of the many-to-many study.
        n_samples: Samples drawn per fixed prompt.
        batch_size: Records synthesized together.
        seed: Seed of the synthesis streams.
    """

    n: int = 300
    n_styles: int = 40
    n_samples: int = 20
    batch_size: int = 50
    seed: int = 7

    def validate(self) -> None:
        if min(self.n, self.n_styles, self.n_samples, self.batch_size) < 1:
            raise ValueError("n, n_styles, n_samples and batch_size must be positive")


@dataclass
class EvalReport(Serializable):
    """Scores of one evaluation run.

    Attributes:
        split: Split tag the records came from.
        n: Number of scored utterances.
        arm: "smsd", "deterministic" (mixture mean) or "oracle" (given codecs).
        accuracy: Attribute name to label accuracy.
        accuracy_ci: Attribute name to its 95% Wilson interval.
        chance: Attribute name to the accuracy of a uniform guess.
        content_accuracy: One minus the mean (capped) content token error rate.
        duration_mae: Mean absolute error of predicted frames per phoneme.
        timbre_readout_cosine: Mean cosine between readout and fused timbre.
        timbre_extract_cosine: Mean cosine between extracted and true timbre.
        speaker_auc: Speaker-verification AUC of the extracted embeddings.
        sa_analog: Fraction of graded-attribute readings with the right label.
        sd_analog: Mean per-prompt variance of decoded degrees.
        degree_variance: Same as sd_analog, kept under its descriptive name.
        distinct_degree_bins: Mean number of distinct readings per prompt and attribute.
        component_entropy: Mean entropy (nats) of mixture component usage per prompt.
        n_all_oov: Prompts whose words were all out of vocabulary.
        invariant_failures: Failed checks; a non-empty list fails the run.
    """

    split: str
    n: int
    arm: str = ARM_SMSD
    accuracy: dict[str, float] = field(default_factory=dict)
    accuracy_ci: dict[str, tuple[float, float]] = field(default_factory=dict)
    chance: dict[str, float] = field(default_factory=dict)
    content_accuracy: float | None = None
    duration_mae: float | None = None
    timbre_readout_cosine: float | None = None
    timbre_extract_cosine: float | None = None
    speaker_auc: float | None = None
    sa_analog: float | None = None
    sd_analog: float | None = None
    degree_variance: float | None = None
    distinct_degree_bins: float | None = None
    component_entropy: float | None = None
    n_all_oov: int = 0
    invariant_failures: list[str] = field(default_factory=list)

    def validate(self) -> None:
        """Raises:
        ValueError: If the count is not positive or an accuracy lies outside [0, 1].
        """
        if self.n <= 0:
            raise ValueError(f"report {self.split} has no samples")
        for name, value in self.accuracy.items():
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"accuracy of {name} is {value}, outside [0, 1]")

    def serialize(self) -> dict[str, Any]:
        data = asdict(self)
        data["accuracy_ci"] = {k: list(v) for k, v in self.accuracy_ci.items()}
        return data

    @classmethod
    def deserialize(cls, data: dict[str, Any]) -> EvalReport:
        values = dict(data)
        values["accuracy_ci"] = {k: (float(v[0]), float(v[1])) for k, v in data["accuracy_ci"].items()}
        return cls(**values)


def chance_levels(toy_codec: ToyCodec, attributes: Sequence[str] = STYLE_ATTRIBUTES) -> dict[str, float]:
    """Accuracy of a uniform label guess; every label owns the same number of codes."""
    return {name: 1.0 / len(toy_codec.categories.domain(name)) for name in attributes}


def chance_failures(report: EvalReport, n_standard_errors: float = 3.0) -> list[str]:
    """Attributes whose accuracy is further than k standard errors from chance."""
    failing = []
    for name, p in report.chance.items():
        if abs(report.accuracy[name] - p) > n_standard_errors * standard_error(p, report.n):
            failing.append(name)
    return failing


def _accuracy_fields(
    toy_codec: ToyCodec,
    codecs: Sequence[CodecMatrix],
    labels: Sequence[AttributeLabels],
) -> dict[str, Any]:
    successes = Counter[str]()
    for codec, target in zip(codecs, labels, strict=True):
        for name, hit in attribute_hits(toy_codec, codec, target, STYLE_ATTRIBUTES).items():
            successes[name] += int(hit)
    n = len(codecs)
    return {
        "accuracy": {name: successes[name] / n for name in STYLE_ATTRIBUTES},
        "accuracy_ci": {name: wilson_interval(successes[name], n) for name in STYLE_ATTRIBUTES},
        "chance": chance_levels(toy_codec),
    }


def score_codecs(
    toy_codec: ToyCodec,
    codecs: Sequence[CodecMatrix],
    labels: Sequence[AttributeLabels],
    split: str = "given",
) -> EvalReport:
    """Oracle accuracy of given codecs against their intended labels.

    Raises:
        ValueError: If there are no codecs or the two sequences differ in length.
    """
    if not codecs:
        raise ValueError("no codecs to score")
    if len(codecs) != len(labels):
        raise ValueError(f"{len(codecs)} codecs but {len(labels)} label sets")
    report = EvalReport(split=split, n=len(codecs), arm=ARM_ORACLE, **_accuracy_fields(toy_codec, codecs, labels))
    report.validate()
    return report


def _batches(items: Sequence[Any], size: int) -> list[Sequence[Any]]:
    return [items[i : i + size] for i in range(0, len(items), size)]


def _content_accuracy(records: Sequence[SyntheticUtterance], samples: Sequence[SynthesizedSample]) -> float:
    errors = [
        min(1.0, token_error_rate(list(r.content_tokens), s.output.content_tokens))
        for r, s in zip(records, samples, strict=True)
    ]
    return 1.0 - float(np.mean(errors))


def eval_control(
    bundle: ModelBundle,
    records: Sequence[SyntheticUtterance],
    split: str,
    config: EvalConfig | None = None,
    decode: DecodeConfig | None = None,
    deterministic_style: bool = False,
) -> EvalReport:
    """Synthesize records from their prompts and score them with the oracle.

    The timbre fused into every output is the one extracted from the
    record's own speech prompt.

    Args:
        bundle: Trained models.
        records: Split records; the first ``config.n`` are used.
        split: Split tag stored on the report.
        config: Evaluation settings.
        decode: Iterative decoding settings.
        deterministic_style: Use the mixture mean instead of sampling.

    Raises:
        ValueError: If records is empty.
    """
    config = config or EvalConfig()
    config.validate()
    records = list(records[: config.n])
    if not records:
        raise ValueError(f"split '{split}' has no records to evaluate")
    bundle.eval()
    toy_codec = bundle.toy_codec

    samples: list[SynthesizedSample] = []
    extracted: list[np.ndarray] = []
    for index, chunk in enumerate(_batches(records, config.batch_size)):
        timbres = extract_timbre(bundle, [toy_codec.render_prompt_frames(r) for r in chunk])
        extracted.extend(timbres)
        samples.extend(
            synthesize_batch(
                bundle,
                [r.content_tokens for r in chunk],
                [r.style_text for r in chunk],
                list(timbres),
                torch_generator(config.seed, "eval", split, index),
                decode,
                deterministic_style,
            )
        )

    report = EvalReport(
        split=split,
        n=len(records),
        arm=ARM_DETERMINISTIC if deterministic_style else ARM_SMSD,
        **_accuracy_fields(toy_codec, [s.codec for s in samples], [r.labels for r in records]),
    )
    report.content_accuracy = _content_accuracy(records, samples)
    report.duration_mae = float(
        np.mean(np.concatenate([np.abs(np.subtract(s.durations, r.durations)) for r, s in zip(records, samples, strict=True)]))
    )
    report.timbre_readout_cosine = float(np.mean([s.output.readout_cosine for s in samples]))
    report.timbre_extract_cosine = float(
        np.mean([float(e @ r.timbre) / float(np.linalg.norm(r.timbre)) for e, r in zip(extracted, records, strict=True)])
    )
    try:
        report.speaker_auc = speaker_auc(np.stack(extracted), [r.speaker_id for r in records])
    except ValueError:
        logger.info("Split %s: speaker AUC undefined for these speakers", split)
    report.n_all_oov = sum(s.prompt_all_oov for s in samples)
    report.validate()
    logger.info(
        "eval %s (%s): n=%d %s",
        split,
        report.arm,
        report.n,
        " ".join(f"{k}={v:.3f}" for k, v in report.accuracy.items()),
    )
    return report


def eval_many_to_many(
    bundle: ModelBundle,
    records: Sequence[SyntheticUtterance],
    config: EvalConfig | None = None,
    decode: DecodeConfig | None = None,
    deterministic_style: bool = False,
    split: str = "many_to_many",
) -> EvalReport:
    """Many samples per fixed prompt: style accuracy and diversity.

    For each of the first ``config.n_styles`` records, the record's prompt
    and text are synthesized ``config.n_samples`` times from a generator
    derived from (seed, style index), so the sampled and deterministic arms
    see the same random streams.

    Returns:
        EvalReport with sa_analog, sd_analog / degree_variance,
        distinct_degree_bins and component_entropy set.
    """
    config = config or EvalConfig()
    config.validate()
    records = list(records[: config.n_styles])
    if not records:
        raise ValueError(f"split '{split}' has no records to evaluate")
    bundle.eval()
    toy_codec = bundle.toy_codec
    timbres = extract_timbre(bundle, [toy_codec.render_prompt_frames(r) for r in records])

    correct = 0
    readings_total = 0
    variances: list[float] = []
    distinct: list[int] = []
    entropies: list[float] = []
    codecs: list[CodecMatrix] = []
    all_oov = 0
    for index, record in enumerate(records):
        samples = synthesize_batch(
            bundle,
            [record.content_tokens] * config.n_samples,
            [record.style_text] * config.n_samples,
            [timbres[index]] * config.n_samples,
            torch_generator(config.seed, "many_to_many", index),
            decode,
            deterministic_style,
        )
        codecs.extend(s.codec for s in samples)
        all_oov += int(samples[0].prompt_all_oov)
        entropies.append(entropy(Counter(s.component for s in samples)))
        for name in GRADED_ATTRIBUTES:
            readings = [s.output.attributes[name] for s in samples]
            correct += sum(1 for r in readings if r is not None and r[0] == record.labels.get(name))
            readings_total += len(readings)
            degrees = [r[1] for r in readings if r is not None and r[1] is not None]
            variances.append(float(np.var(degrees)) if degrees else 0.0)
            distinct.append(len({r for r in readings if r is not None}))

    report = EvalReport(
        split=split,
        n=len(codecs),
        arm=ARM_DETERMINISTIC if deterministic_style else ARM_SMSD,
        **_accuracy_fields(
            toy_codec, codecs, [r.labels for r in records for _ in range(config.n_samples)]
        ),
    )
    report.sa_analog = correct / readings_total
    report.degree_variance = float(np.mean(variances))
    report.sd_analog = report.degree_variance
    report.distinct_degree_bins = float(np.mean(distinct))
    report.component_entropy = float(np.mean(entropies))
    report.n_all_oov = all_oov
    report.validate()
    logger.info(
        "many-to-many (%s): SA %.3f SD %.5f bins %.2f H %.3f",
        report.arm,
        report.sa_analog,
        report.sd_analog,
        report.distinct_degree_bins,
        report.component_entropy,
    )
    return report


def check_split_hygiene(corpus: Corpus, manifest: dict[str, Any]) -> list[str]:
    """Verify heldout templates and speakers never reach the training split.

    Compares template ids and speaker ids recorded in the manifest, and the
    hashed prompts of the heldout-style split, against the training records.

    Returns:
        One message per violated check; empty when the corpus is clean.
    """
    if "train" not in corpus.splits:
        return ["training split not loaded; split hygiene cannot be checked"]
    train = corpus["train"]
    failures = []

    heldout_templates = {stable_hash(t) for t in manifest.get("template_groups", {}).get("heldout", [])}
    train_templates = {stable_hash(r.template_id) for r in train if r.template_id is not None}
    if leaked := heldout_templates & train_templates:
        failures.append(f"{len(leaked)} heldout template(s) appear in the training split")

    heldout_speakers = {stable_hash(s) for s in manifest.get("speakers", {}).get("heldout", [])}
    train_speakers = {stable_hash(r.speaker_id) for r in train}
    if leaked := heldout_speakers & train_speakers:
        failures.append(f"{len(leaked)} heldout speaker(s) appear in the training split")

    if "heldout_style" in corpus.splits:
        heldout_prompts = {stable_hash(list(r.style_text)) for r in corpus["heldout_style"]}
        train_prompts = {stable_hash(list(r.style_text)) for r in train}
        if leaked := heldout_prompts & train_prompts:
            failures.append(f"{len(leaked)} heldout-style prompt(s) also occur in the training split")

    for message in failures:
        logger.error("Split hygiene: %s", message)
    return failures


def render_reports(reports: Sequence[EvalReport]) -> str:
    """Plain-text table of report scores, one row per report."""
    columns = ["split", "arm", "n", *STYLE_ATTRIBUTES, "content", "readout_cos", "auc", "SA", "SD"]
    rows = [columns]
    for r in reports:
        rows.append(
            [
                r.split,
                r.arm,
                str(r.n),
                *(f"{r.accuracy[name]:.3f}" if name in r.accuracy else "-" for name in STYLE_ATTRIBUTES),
                *(
                    "-" if value is None else f"{value:.3f}"
                    for value in (r.content_accuracy, r.timbre_readout_cosine, r.speaker_auc, r.sa_analog)
                ),
                "-" if r.sd_analog is None else f"{r.sd_analog:.5f}",
            ]
        )
    widths = [max(len(row[i]) for row in rows) for i in range(len(columns))]
    return "\n".join("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows)
