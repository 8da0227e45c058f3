"""Ablation grids over the mixture head.

A grid varies the component count K, the noise mode and the conditional
normalization denominator. Every cell trains a fresh model from the same
seed protocol for a reduced number of steps, then runs the many-to-many
study and an in-domain control evaluation. Finished cells are written as
one JSON file each, so an interrupted grid resumes where it stopped.

Author:
    Michael Economou

Date:
    2026-10-17
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any

import torch
from tqdm import tqdm

from control_tts.constants import ABLATION_SUMMARY_FILE, ABLATION_TABLE_FILE
from control_tts.evaluation.control import EvalConfig, EvalReport, eval_control, eval_many_to_many
from control_tts.models.generator import DecodeConfig
from control_tts.models.registry import NoiseMode
from control_tts.models.tts import ControllableTTS, ModelConfig
from control_tts.persistence.corpus_jsonl import read_json, write_json
from control_tts.pipeline import CorpusContext
from control_tts.training.data import BatchStream
from control_tts.training.trainer import NonFiniteLossError, TrainConfig, Trainer, create_train_state
from control_tts.utils.helpers import stable_hash

logger = logging.getLogger(__name__)

CELLS_DIR = "cells"


@dataclass
class AblationGrid:
    """Grid axes and the reduced budget of every cell.

    By default the grid is the union of three one-axis sweeps around
    (default_k, default_mode, variance_norm off): one row per K, one row per noise
    mode, one row per normalization denominator. With ``product`` every combination is run.

    Attributes:
        n_components: K values.
        noise_modes: Noise mode names.
        variance_norm: Conditional normalization denominators to try.
        default_k: K of the mode and denominator sweeps.
        default_mode: Noise mode of the K and denominator sweeps.
        product: Run the full Cartesian product instead of the sweeps.
        train_steps: Training steps per cell.
        eval_n: Records of the in-domain control evaluation per cell.
        n_styles: Fixed prompts of the many-to-many study per cell.
        n_samples: Samples per fixed prompt.
    """

    n_components: tuple[int, ...] = (3, 5, 7)
    noise_modes: tuple[str, ...] = tuple(mode.value for mode in NoiseMode)
    variance_norm: tuple[bool, ...] = (False, True)
    default_k: int = 5
    default_mode: str = NoiseMode.ISOTROPIC_ACROSS_CLUSTERS.value
    product: bool = False
    train_steps: int = 600
    eval_n: int = 100
    n_styles: int = 10
    n_samples: int = 10

    def __post_init__(self) -> None:
        self.n_components = tuple(self.n_components)
        self.noise_modes = tuple(self.noise_modes)
        self.variance_norm = tuple(self.variance_norm)

    def validate(self) -> None:
        if not self.n_components or min(self.n_components) < 1:
            raise ValueError("n_components must list positive K values")
        if not self.noise_modes or not self.variance_norm:
            raise ValueError("every grid axis needs at least one value")
        for mode in (*self.noise_modes, self.default_mode):
            NoiseMode.parse(mode)
        if min(self.train_steps, self.eval_n, self.n_styles, self.n_samples, self.default_k) < 1:
            raise ValueError("train_steps, eval_n, n_styles, n_samples and default_k must be positive")

    def cells(self) -> list[AblationCell]:
        """Cells in a stable order without duplicates."""
        modes = [NoiseMode.parse(m).value for m in self.noise_modes]
        default_mode = NoiseMode.parse(self.default_mode).value
        if self.product:
            keys = [(k, m, e) for k in self.n_components for m in modes for e in self.variance_norm]
        else:
            keys = [(k, default_mode, False) for k in self.n_components]
            keys += [(self.default_k, m, False) for m in modes]
            keys += [(self.default_k, default_mode, e) for e in self.variance_norm]
        cells: list[AblationCell] = []
        for key in keys:
            cell = AblationCell(*key)
            if cell not in cells:
                cells.append(cell)
        return cells


@dataclass(frozen=True)
class AblationCell:
    n_components: int
    noise_mode: str
    variance_norm: bool

    @property
    def cell_id(self) -> str:
        norm = "var" if self.variance_norm else "std"
        return f"k{self.n_components}-{self.noise_mode}-{norm}"

    def apply(self, config: ModelConfig) -> ModelConfig:
        return replace(
            config,
            smsd=replace(config.smsd, n_components=self.n_components, noise_mode=self.noise_mode),
            fusion=replace(config.fusion, variance_norm=self.variance_norm),
        )


@dataclass
class AblationResult:
    """Outcome of one grid cell.

    Attributes:
        cell_id: Cell identifier.
        n_components: K.
        noise_mode: Noise mode name.
        variance_norm: Variance denominator in the conditional normalization.
        n_variances: Learned variance values per mixture.
        sigma_unchanged: Whether the reference variances are bit-identical before
            and after training.
        final_losses: Last training step breakdown.
        diverged: Whether a loss became non-finite.
        control: In-domain control report.
        many_to_many: Many-to-many report.
        fingerprint: Hash of the cell's full configuration.
    """

    cell_id: str
    n_components: int
    noise_mode: str
    variance_norm: bool
    n_variances: int
    sigma_unchanged: bool
    final_losses: dict[str, float]
    diverged: bool
    control: EvalReport | None
    many_to_many: EvalReport | None
    fingerprint: str

    def serialize(self) -> dict[str, Any]:
        data = asdict(self)
        data["control"] = None if self.control is None else self.control.serialize()
        data["many_to_many"] = None if self.many_to_many is None else self.many_to_many.serialize()
        return data

    @classmethod
    def deserialize(cls, data: dict[str, Any]) -> AblationResult:
        values = dict(data)
        for key in ("control", "many_to_many"):
            values[key] = None if data[key] is None else EvalReport.deserialize(data[key])
        return cls(**values)


@torch.no_grad()
def sigma_snapshot(model: ControllableTTS, reference_prompt_ids: torch.Tensor) -> torch.Tensor:
    """Mixture variances of a fixed reference batch, without noise."""
    model.eval()
    return model.mixture(reference_prompt_ids).variances.detach().clone()


@dataclass
class AblationRunner:
    """Trains and evaluates grid cells against one corpus.

    Args:
        context: Loaded corpus with its codec and vocabulary.
        model_config: Base model configuration every cell modifies.
        train_config: Base training configuration (steps replaced per cell).
        eval_config: Base evaluation settings (sizes replaced per cell).
        decode: Iterative decoding settings.
        out_dir: Directory of per-cell results; None keeps results in memory.
        show_progress: Display tqdm bars.
    """

    context: CorpusContext
    model_config: ModelConfig
    train_config: TrainConfig
    eval_config: EvalConfig = field(default_factory=EvalConfig)
    decode: DecodeConfig = field(default_factory=DecodeConfig)
    out_dir: Path | None = None
    show_progress: bool = False

    def fingerprint(self, cell: AblationCell, grid: AblationGrid) -> str:
        return stable_hash(
            {
                "cell": asdict(cell),
                "model": asdict(cell.apply(self.model_config)),
                "train": asdict(self.train_config),
                "eval": asdict(self.eval_config),
                "decode": asdict(self.decode),
                "budget": [grid.train_steps, grid.eval_n, grid.n_styles, grid.n_samples],
                "corpus": self.context.manifest.get("splits", {}),
            }
        )

    def _cell_path(self, cell: AblationCell) -> Path | None:
        return None if self.out_dir is None else self.out_dir / CELLS_DIR / f"{cell.cell_id}.json"

    def _load_finished(self, cell: AblationCell, fingerprint: str) -> AblationResult | None:
        path = self._cell_path(cell)
        if path is None or not path.exists():
            return None
        result = AblationResult.deserialize(read_json(path))
        if result.fingerprint != fingerprint:
            logger.warning("Ignoring stale result for %s (configuration changed)", cell.cell_id)
            return None
        logger.info("Resuming: cell %s already finished", cell.cell_id)
        return result

    def run_cell(self, cell: AblationCell, grid: AblationGrid) -> AblationResult:
        """Train and evaluate one cell, or load its finished result."""
        fingerprint = self.fingerprint(cell, grid)
        finished = self._load_finished(cell, fingerprint)
        if finished is not None:
            return finished

        logger.info("Ablation cell %s: training %d steps", cell.cell_id, grid.train_steps)
        train_config = replace(self.train_config, total_steps=grid.train_steps)
        train_config = replace(train_config, warmup_steps=min(train_config.warmup_steps, grid.train_steps // 5))
        state = create_train_state(cell.apply(self.model_config), train_config)
        stream = BatchStream(self.context.prepared("train"), train_config.batch_frames, train_config.seed)
        reference = stream.batch_at(0).prompt_ids
        before = sigma_snapshot(state.model, reference)

        diverged = False
        history: list[dict[str, Any]] = []
        try:
            history = Trainer(train_config, stream, show_progress=self.show_progress).run(state)
        except NonFiniteLossError as e:
            logger.error("Cell %s diverged at step %d", cell.cell_id, e.step)
            diverged = True
        after = sigma_snapshot(state.model, reference)

        control = many = None
        if not diverged:
            bundle = self.context.bundle(state.model, state.codec_stage)
            eval_config = replace(
                self.eval_config, n=grid.eval_n, n_styles=grid.n_styles, n_samples=grid.n_samples
            )
            control = eval_control(bundle, self.context.corpus["test"], "test", eval_config, self.decode)
            many = eval_many_to_many(bundle, self.context.corpus["many_to_many"], eval_config, self.decode)

        result = AblationResult(
            cell_id=cell.cell_id,
            n_components=cell.n_components,
            noise_mode=cell.noise_mode,
            variance_norm=cell.variance_norm,
            n_variances=state.model.smsd.n_variances(),
            sigma_unchanged=bool(torch.equal(before, after)),
            final_losses={k: float(v) for k, v in history[-1].items()} if history else {},
            diverged=diverged,
            control=control,
            many_to_many=many,
            fingerprint=fingerprint,
        )
        path = self._cell_path(cell)
        if path is not None:
            path.parent.mkdir(parents=True, exist_ok=True)
            write_json(result.serialize(), path)
        return result

    def run(self, grid: AblationGrid) -> list[AblationResult]:
        """Run every cell of a grid and write the table and summary."""
        grid.validate()
        cells = grid.cells()
        results = [self.run_cell(cell, grid) for cell in tqdm(cells, desc="ablation", disable=not self.show_progress)]
        if self.out_dir is not None:
            write_json(
                {"grid": asdict(grid), "cells": [r.serialize() for r in results]},
                self.out_dir / ABLATION_SUMMARY_FILE,
            )
            (self.out_dir / ABLATION_TABLE_FILE).write_text(render_ablation_table(results) + "\n", encoding="utf-8")
        return results


def run_ablations(
    grid: AblationGrid,
    context: CorpusContext,
    model_config: ModelConfig,
    train_config: TrainConfig,
    eval_config: EvalConfig | None = None,
    decode: DecodeConfig | None = None,
    out_dir: str | Path | None = None,
    show_progress: bool = False,
) -> list[AblationResult]:
    """Train and evaluate every cell of a grid; finished cells are reused."""
    runner = AblationRunner(
        context,
        model_config,
        train_config,
        eval_config or EvalConfig(),
        decode or DecodeConfig(),
        None if out_dir is None else Path(out_dir),
        show_progress,
    )
    return runner.run(grid)


def _fmt(value: float | None, digits: int = 3) -> str:
    return "-" if value is None else f"{value:.{digits}f}"


def render_ablation_table(results: Sequence[AblationResult]) -> str:
    """Rows are grid cells; columns are the accuracy and diversity analogs."""
    header = ["cell", "K", "mode", "norm", "n_var", "sigma_fixed", "SA", "SD", "bins", "H(comp)", "acc"]
    rows = [header]
    for r in results:
        many, control = r.many_to_many, r.control
        mean_acc = None if control is None else sum(control.accuracy.values()) / len(control.accuracy)
        rows.append(
            [
                r.cell_id,
                str(r.n_components),
                r.noise_mode,
                "var" if r.variance_norm else "std",
                str(r.n_variances),
                "yes" if r.sigma_unchanged else "no",
                "diverged" if r.diverged else _fmt(many.sa_analog if many else None),
                _fmt(many.sd_analog if many else None, 5),
                _fmt(many.distinct_degree_bins if many else None, 2),
                _fmt(many.component_entropy if many else None),
                _fmt(mean_acc),
            ]
        )
    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in rows)
