"""Command-line surface.

Subcommands:
    gen-data  Generate a synthetic corpus and its manifest.
    train     Train the TTS model and codec stage on a corpus.
    synth     Synthesize from a style prompt with a chosen timbre.
    eval      Score a checkpoint on corpus splits.
    ablate    Train and evaluate an ablation grid.

Exit codes: 0 on success, 2 when an invariant check fails, 3 on
configuration or input errors.

Author:
    Michael Economou

Date:
    2026-10-17
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from collections.abc import Callable, Sequence
from dataclasses import replace
from pathlib import Path
from typing import Any

import numpy as np
import yaml
from omegaconf import DictConfig, OmegaConf

from control_tts.constants import (
    ABLATION_TABLE_FILE,
    CHECKPOINT_FILE,
    DATA_ROOT_ENV,
    DIAGNOSTIC_FILE,
    EVAL_SPLITS,
    EXIT_CONFIG_ERROR,
    EXIT_INVARIANT_FAILURE,
    EXIT_OK,
    REPORT_FILE,
    RESOLVED_CONFIG_FILE,
    TRAIN_LOG_FILE,
)
from control_tts.core.codec import SyntheticUtterance, ToyCodec
from control_tts.core.corpus import generate_corpus
from control_tts.core.style_extractor import StyleExtractor
from control_tts.evaluation.ablation import run_ablations
from control_tts.evaluation.control import (
    EvalReport,
    check_split_hygiene,
    eval_control,
    eval_many_to_many,
    render_reports,
)
from control_tts.models.fusion import CodecStage
from control_tts.models.registry import NoiseMode
from control_tts.models.tts import ControllableTTS
from control_tts.persistence.checkpoint import (
    CheckpointMismatchError,
    load_checkpoint,
    read_checkpoint,
    save_checkpoint,
)
from control_tts.persistence.corpus_jsonl import (
    InvalidFileError,
    append_jsonl,
    load_corpus,
    prepare_output_dir,
    read_jsonl,
    write_corpus,
    write_json,
    write_jsonl,
)
from control_tts.pipeline import CorpusContext, ModelBundle, extract_timbre, synthesize_batch, torch_generator
from control_tts.prompts.bank import TEMPLATE_GROUPS, StylePrompt, Vocabulary
from control_tts.run_config import ConfigError, RunConfig
from control_tts.training.data import BatchStream
from control_tts.training.trainer import NonFiniteLossError, Trainer, TrainState, create_train_state
from control_tts.utils.helpers import derive_seed
from control_tts.utils.logging_config import setup_logging

logger = logging.getLogger(__name__)

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")
TRAIN_LOG_FIELDS = (
    "step", "lr", "codec", "dur", "smsd", "total", "timbre_extract", "timbre_readout", "n_masked", "skipped"
)
INPUT_ERRORS = (ConfigError, InvalidFileError, CheckpointMismatchError, FileExistsError, FileNotFoundError, ValueError)


def default_data_root() -> str:
    return os.environ.get(DATA_ROOT_ENV, "data")


def _show_progress() -> bool:
    return sys.stderr.isatty()


def write_resolved_config(run: RunConfig, directory: Path, extra: dict[str, Any] | None = None) -> None:
    """Persist the exact configuration (and its hash) an artifact was made with."""
    write_json(
        {"config": run.to_dict(), "config_hash": run.config_hash(), **(extra or {})},
        directory / RESOLVED_CONFIG_FILE,
    )


def load_run(args: argparse.Namespace) -> RunConfig:
    return RunConfig.load(args.config, args.set, args.seed)


# Checkpoint to models


def load_bundle(ckpt: str | Path) -> tuple[ModelBundle, RunConfig, dict[str, Any]]:
    """Rebuild the models, codec and vocabulary a checkpoint was trained with.

    Raises:
        CheckpointMismatchError: If the weights do not fit the recorded configuration.
    """
    payload = read_checkpoint(ckpt)
    saved = payload["config"]
    run = RunConfig.from_dict(saved["run"]).resolve()
    vocabulary = Vocabulary(list(saved["vocabulary"]))
    model_config = run.model_config(len(vocabulary))
    model = ControllableTTS(model_config)
    stage = CodecStage(model_config.layout, model_config.d_timbre, model_config.fusion)
    try:
        model.load_state_dict(payload["model"])
        stage.load_state_dict(payload["codec_stage"])
    except RuntimeError as e:
        raise CheckpointMismatchError(f"{ckpt}: weights do not match the recorded configuration") from e
    bundle = ModelBundle(ToyCodec(run.data), StyleExtractor(run.data), vocabulary, model, stage).eval()
    logger.info("Loaded checkpoint %s (step %d)", ckpt, payload["step"])
    return bundle, run, payload


# gen-data


def cmd_gen_data(args: argparse.Namespace) -> int:
    run = load_run(args)
    out = prepare_output_dir(args.out, args.force)
    bank = run.prompts.load_bank()
    toy_codec = ToyCodec(run.data)
    corpus = generate_corpus(toy_codec, bank.prompt_source)
    write_corpus(
        corpus,
        toy_codec,
        out,
        template_groups={group: sorted(bank.template_ids(group)) for group in TEMPLATE_GROUPS},
        vocabulary=bank.vocabulary().words,
    )
    write_resolved_config(run, out)
    print(f"corpus written to {out}")
    for split, n in corpus.sizes().items():
        print(f"  {split:<16} {n}")
    return EXIT_OK


# train


def _rewind_train_log(path: Path, step: int) -> None:
    """Drop log lines at or beyond a resumed step."""
    if path.exists():
        write_jsonl([r for r in read_jsonl(path) if int(r["step"]) < step], path)


def cmd_train(args: argparse.Namespace) -> int:
    run = load_run(args)
    corpus, manifest = load_corpus(args.data, splits=("train",))
    if corpus.config != run.data:
        logger.info("Using the dataset configuration recorded in %s", args.data)
        run = replace(run, data=corpus.config).resolve()
    if not manifest.get("vocabulary"):
        raise InvalidFileError(f"{args.data}: manifest has no prompt vocabulary")
    context = CorpusContext.build(corpus, manifest, Vocabulary(list(manifest["vocabulary"])))
    config_hash = run.config_hash()
    saved_config = {"run": run.to_dict(), "vocabulary": context.vocabulary.words}

    out = Path(args.out)
    ckpt_path = out / CHECKPOINT_FILE
    state = create_train_state(run.model_config(len(context.vocabulary)), run.train)
    if args.resume:
        if not ckpt_path.exists():
            raise FileNotFoundError(f"nothing to resume: {ckpt_path} does not exist")
        state = load_checkpoint(ckpt_path, state, expected_hash=config_hash)
        _rewind_train_log(out / TRAIN_LOG_FILE, state.step)
    else:
        prepare_output_dir(out, args.force)
    write_resolved_config(run, out, {"data_dir": str(args.data)})

    def checkpoint_sink(current: TrainState) -> None:
        save_checkpoint(ckpt_path, current, saved_config, config_hash)

    def log_sink(breakdown: dict[str, Any]) -> None:
        append_jsonl({key: breakdown[key] for key in TRAIN_LOG_FIELDS}, out / TRAIN_LOG_FILE)

    stream = BatchStream(context.prepared("train"), run.train.batch_frames, run.train.seed)
    trainer = Trainer(run.train, stream, log_sink, checkpoint_sink, show_progress=_show_progress())
    try:
        history = trainer.run(state, until_step=args.steps)
    except NonFiniteLossError as e:
        write_json(
            {"step": e.step, "breakdown": {k: repr(v) for k, v in e.breakdown.items()}, "config_hash": config_hash},
            out / DIAGNOSTIC_FILE,
        )
        logger.error("Training aborted at step %d; diagnostics in %s", e.step, out / DIAGNOSTIC_FILE)
        return EXIT_INVARIANT_FAILURE
    save_checkpoint(ckpt_path, state, saved_config, config_hash)
    if history:
        last = history[-1]
        print(
            f"step {last['step']}: codec {last['codec']:.4f} dur {last['dur']:.4f} "
            f"smsd {last['smsd']:.4f} (skipped {last['skipped']})"
        )
    print(f"checkpoint: {ckpt_path}")
    return EXIT_OK


# synth


def _timbre_reference(toy_codec: ToyCodec, source: str, seed: int) -> SyntheticUtterance:
    """Reference utterance whose speech prompt provides the timbre."""
    if source.isdigit():
        rng = np.random.default_rng(derive_seed(seed, "synth", "reference"))
        return toy_codec.synth_utterance(rng, speaker_id=int(source), utterance_id=f"speaker-{source}")
    path = Path(source)
    if not path.exists():
        raise FileNotFoundError(f"timbre source '{source}' is neither a speaker id nor a file")
    records = read_jsonl(path)
    if not records:
        raise InvalidFileError(f"{path} holds no utterance")
    return SyntheticUtterance.deserialize(records[0], toy_codec.layout)


def _parse_text(text: str | None, toy_codec: ToyCodec, seed: int) -> list[int]:
    config = toy_codec.config
    if text is None:
        rng = np.random.default_rng(derive_seed(seed, "synth", "text"))
        length = int(rng.integers(config.min_text_len, config.max_text_len + 1))
        return [int(v) for v in rng.integers(config.text_vocab, size=length)]
    try:
        content = [int(v) for v in text.split()]
    except ValueError:
        raise ValueError(f"--text must be space separated phoneme ids, got '{text}'") from None
    if not content or min(content) < 0 or max(content) >= config.text_vocab:
        raise ValueError(f"--text needs phoneme ids in [0, {config.text_vocab})")
    return content


def cmd_synth(args: argparse.Namespace) -> int:
    bundle, run, _ = load_bundle(args.ckpt)
    toy_codec = bundle.toy_codec
    prompt = StylePrompt.from_text(args.style_text)
    seed = run.eval.seed if args.seed is None else args.seed
    reference = _timbre_reference(toy_codec, str(args.timbre_from), seed)
    timbre = extract_timbre(bundle, [toy_codec.render_prompt_frames(reference)])[0]
    content = _parse_text(args.text, toy_codec, seed)
    if bundle.vocabulary.is_all_oov(prompt.tokens):
        logger.warning("Style text '%s' has no known word; synthesizing from the <oov> prompt", prompt.text)

    samples = synthesize_batch(
        bundle,
        [content] * args.n,
        [prompt.tokens] * args.n,
        [timbre] * args.n,
        torch_generator(seed, "synth"),
        run.decode,
    )
    records = []
    for index, sample in enumerate(samples):
        record = {
            "index": index,
            "seed": seed,
            "style_text": prompt.text,
            "all_oov": sample.prompt_all_oov,
            "timbre_from": str(args.timbre_from),
            "component": sample.component,
            **sample.output.serialize(),
        }
        records.append(record)
        attributes = " ".join(
            f"{name}=-" if value is None else f"{name}={value[0]}" + ("" if value[1] is None else f"@{value[1]:.1f}")
            for name, value in sample.output.attributes.items()
        )
        flag = " [all-oov prompt]" if sample.prompt_all_oov else ""
        print(f"#{index} {attributes} readout_cos={sample.output.readout_cosine:.3f}{flag}")
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        if out.exists() and not args.force:
            raise FileExistsError(f"{out} exists (use --force to overwrite)")
        write_jsonl(records, out)
        write_resolved_config(run, out.parent, {"checkpoint": str(args.ckpt), "seed": seed})
    return EXIT_OK


# eval


def _check_corpus_matches(run: RunConfig, corpus_config: Any, manifest: dict[str, Any], vocabulary: Vocabulary) -> None:
    if corpus_config != run.data:
        raise CheckpointMismatchError("checkpoint was trained on a corpus with another configuration")
    if list(manifest.get("vocabulary", [])) != vocabulary.words:
        raise CheckpointMismatchError("checkpoint prompt vocabulary differs from the corpus vocabulary")


def cmd_eval(args: argparse.Namespace) -> int:
    bundle, run, _ = load_bundle(args.ckpt)
    if args.n is not None:
        run = replace(run, eval=replace(run.eval, n=args.n))
    if args.seed is not None:
        run = replace(run, eval=replace(run.eval, seed=args.seed))
    splits = list(EVAL_SPLITS) + ["many_to_many"] if args.split == "all" else [args.split]
    corpus, manifest = load_corpus(args.data, splits=sorted({"train", *splits}))
    _check_corpus_matches(run, corpus.config, manifest, bundle.vocabulary)

    failures = check_split_hygiene(corpus, manifest)
    reports: list[EvalReport] = []
    for split in splits:
        if split == "many_to_many":
            for deterministic in (False, True):
                reports.append(eval_many_to_many(bundle, corpus[split], run.eval, run.decode, deterministic))
        else:
            reports.append(eval_control(bundle, corpus[split], split, run.eval, run.decode))
    for report in reports:
        report.invariant_failures = list(failures)

    print(render_reports(reports))
    if args.out:
        out = prepare_output_dir(args.out, args.force)
        write_jsonl([r.serialize() for r in reports], out / REPORT_FILE)
        (out / "eval_table.txt").write_text(render_reports(reports) + "\n", encoding="utf-8")
        write_resolved_config(run, out, {"checkpoint": str(args.ckpt)})
    if failures:
        for message in failures:
            print(f"INVARIANT FAILED: {message}")
        return EXIT_INVARIANT_FAILURE
    return EXIT_OK


# ablate


def _load_grid(run: RunConfig, path: str | None) -> RunConfig:
    if path is None:
        return run
    try:
        grid = OmegaConf.load(path)
    except (OSError, yaml.YAMLError) as e:
        raise ConfigError(f"cannot read grid file {path}: {e}") from e
    if not isinstance(grid, DictConfig):
        raise ConfigError(f"grid file {path} must hold a mapping")
    return run.with_overrides({"ablation": grid.get("ablation", grid)})


def cmd_ablate(args: argparse.Namespace) -> int:
    run = _load_grid(load_run(args), args.grid)
    corpus, manifest = load_corpus(args.data, splits=("train", "test", "many_to_many"))
    if corpus.config != run.data:
        run = replace(run, data=corpus.config).resolve()
    context = CorpusContext.build(corpus, manifest, Vocabulary(list(manifest.get("vocabulary", []))))
    out = Path(args.out)
    if args.force:
        prepare_output_dir(out, force=True)
    out.mkdir(parents=True, exist_ok=True)
    write_resolved_config(run, out, {"data_dir": str(args.data)})

    results = run_ablations(
        run.ablation,
        context,
        run.model_config(len(context.vocabulary)),
        run.train,
        run.eval,
        run.decode,
        out,
        show_progress=_show_progress(),
    )
    print((out / ABLATION_TABLE_FILE).read_text(encoding="utf-8"), end="")

    failures = []
    d_style = run.data.d_style
    for r in results:
        mode = NoiseMode.parse(r.noise_mode)
        if mode is NoiseMode.FIXED_ISOTROPIC and not r.sigma_unchanged:
            failures.append(f"{r.cell_id}: fixed variances changed during training")
        if mode is NoiseMode.FULLY_FACTORED and r.n_variances != r.n_components * d_style:
            failures.append(f"{r.cell_id}: expected {r.n_components * d_style} variances, got {r.n_variances}")
        if mode is NoiseMode.ISOTROPIC_ACROSS_CLUSTERS and r.n_variances != 1:
            failures.append(f"{r.cell_id}: expected one shared variance, got {r.n_variances}")
    for message in failures:
        logger.error("Ablation invariant failed: %s", message)
    return EXIT_INVARIANT_FAILURE if failures else EXIT_OK


# Parser


def build_parser(prog: str | None = None, default_log_dir: str | None = "logs") -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML configuration file")
    common.add_argument(
        "--set", action="append", default=[], metavar="SECTION.KEY=VALUE", help="override one setting"
    )
    common.add_argument("--seed", type=int, help="master seed of the corpus, training and evaluation")
    common.add_argument("--log-dir", default=default_log_dir, help="log file directory ('' for console only)")
    common.add_argument("--log-level", default="INFO", choices=LOG_LEVELS)
    common.add_argument("--force", action="store_true", help="overwrite existing outputs")

    parser = argparse.ArgumentParser(prog=prog, description="Style-controllable TTS over a synthetic codec")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen-data", parents=[common], help="generate a synthetic corpus")
    gen.add_argument("--out", default=default_data_root())
    gen.set_defaults(handler=cmd_gen_data)

    train = sub.add_parser("train", parents=[common], help="train on a corpus")
    train.add_argument("--data", default=default_data_root())
    train.add_argument("--out", required=True)
    train.add_argument("--resume", action="store_true", help="continue from OUT/checkpoint.pt")
    train.add_argument("--steps", type=int, help="stop at this step instead of train.total_steps")
    train.set_defaults(handler=cmd_train)

    synth = sub.add_parser("synth", parents=[common], help="synthesize from a style prompt")
    synth.add_argument("--ckpt", required=True)
    synth.add_argument("--style-text", required=True)
    synth.add_argument("--timbre-from", required=True, help="speaker id or utterance JSONL file")
    synth.add_argument("--n", type=int, default=1)
    synth.add_argument("--text", help="space separated phoneme ids (random when omitted)")
    synth.add_argument("--out", help="JSONL output file")
    synth.set_defaults(handler=cmd_synth)

    ev = sub.add_parser("eval", parents=[common], help="evaluate a checkpoint")
    ev.add_argument("--ckpt", required=True)
    ev.add_argument("--data", default=default_data_root())
    ev.add_argument("--split", default="all", choices=[*EVAL_SPLITS, "many_to_many", "all"])
    ev.add_argument("--n", type=int)
    ev.add_argument("--out")
    ev.set_defaults(handler=cmd_eval)

    ablate = sub.add_parser("ablate", parents=[common], help="run an ablation grid")
    ablate.add_argument("--data", default=default_data_root())
    ablate.add_argument("--out", required=True)
    ablate.add_argument("--grid", help="YAML file with the ablation grid")
    ablate.set_defaults(handler=cmd_ablate)
    return parser


def main(
    argv: Sequence[str] | None = None,
    prog: str | None = None,
    default_log_dir: str | None = "logs",
) -> int:
    """Parse arguments, configure logging and run a subcommand.

    Returns:
        Process exit code.
    """
    args = build_parser(prog, default_log_dir).parse_args(argv)
    setup_logging(args.log_dir or None, getattr(logging, args.log_level), run_name=args.command)
    handler: Callable[[argparse.Namespace], int] = args.handler
    if getattr(args, "n", 1) is not None and getattr(args, "n", 1) < 1:
        logger.error("--n must be positive")
        return EXIT_CONFIG_ERROR
    try:
        return handler(args)
    except INPUT_ERRORS as e:
        logger.error("%s: %s", args.command, e)
        return EXIT_CONFIG_ERROR
