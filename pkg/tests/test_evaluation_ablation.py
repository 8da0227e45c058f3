"""Tests for ablation grids and their resumable runner."""

import json

import pytest

from control_tts.constants import ABLATION_SUMMARY_FILE, ABLATION_TABLE_FILE
from control_tts.evaluation import (
    AblationGrid,
    AblationResult,
    EvalConfig,
    EvalReport,
    render_ablation_table,
    run_ablations,
)
from control_tts.evaluation.ablation import AblationCell
from control_tts.models import DecodeConfig
from control_tts.training import NonFiniteLossError, Trainer

FAST_DECODE = DecodeConfig(iterations_first=2, iterations_rest=1)
TINY_GRID = AblationGrid(
    n_components=(2,),
    noise_modes=("fixed_isotropic", "fully_factored"),
    variance_norm=(False,),
    default_k=2,
    default_mode="fully_factored",
    train_steps=2,
    eval_n=2,
    n_styles=1,
    n_samples=2,
)


class TestAblationGrid:
    """Test suite for grid construction."""

    def test_default_grid_is_union_of_sweeps(self):
        """Test the default grid has 3 K cells, 3 further modes and 1 variance-norm cell."""
        cells = AblationGrid().cells()
        assert len(cells) == 7
        assert len({c.cell_id for c in cells}) == 7
        assert cells[0].cell_id == "k3-isotropic_across_clusters-std"

    def test_product_grid(self):
        """Test the product grid covers every combination."""
        assert len(AblationGrid(product=True).cells()) == 3 * 4 * 2

    def test_cell_applies_to_model_config(self, tiny_model_config):
        """Test a cell sets K, the noise mode and the normalization variant."""
        config = AblationCell(3, "isotropic", True).apply(tiny_model_config)
        assert config.smsd.n_components == 3
        assert config.smsd.noise_mode == "isotropic"
        assert config.fusion.variance_norm
        assert tiny_model_config.smsd.n_components == 5

    @pytest.mark.parametrize(
        "changes",
        [{"n_components": ()}, {"noise_modes": ("gaussian",)}, {"train_steps": 0}, {"variance_norm": ()}],
    )
    def test_invalid_grid_rejected(self, changes):
        """Test empty axes, unknown modes and empty budgets raise ValueError."""
        from dataclasses import replace

        with pytest.raises(ValueError):
            replace(AblationGrid(), **changes).validate()


class TestAblationResult:
    """Test suite for AblationResult and the table."""

    def make_result(self, diverged=False):
        report = EvalReport(split="many_to_many", n=2, sa_analog=0.5, sd_analog=0.01, component_entropy=0.3)
        return AblationResult(
            cell_id="k2-isotropic-std",
            n_components=2,
            noise_mode="isotropic",
            variance_norm=False,
            n_variances=2,
            sigma_unchanged=False,
            final_losses={"codec": 1.0},
            diverged=diverged,
            control=None,
            many_to_many=None if diverged else report,
            fingerprint="f",
        )

    def test_serialize_round_trip(self):
        """Test a result survives JSON serialization."""
        result = self.make_result()
        assert AblationResult.deserialize(json.loads(json.dumps(result.serialize()))) == result

    def test_table_marks_divergence(self):
        """Test diverged cells are labelled in the table."""
        table = render_ablation_table([self.make_result(), self.make_result(diverged=True)])
        lines = table.splitlines()
        assert len(lines) == 3
        assert "diverged" in lines[2]
        assert "0.500" in lines[1]


@pytest.mark.slow
class TestRunAblations:
    """Test suite for run_ablations on a tiny grid."""

    def test_tiny_grid_and_resume(self, context, tiny_model_config, tiny_train_config, tmp_path, mocker):
        """Test fixed sigma stays put, factored variances are counted and reruns resume."""
        eval_config = EvalConfig(batch_size=4)
        results = run_ablations(
            TINY_GRID, context, tiny_model_config, tiny_train_config, eval_config, FAST_DECODE, tmp_path
        )
        by_mode = {r.noise_mode: r for r in results}
        assert set(by_mode) == {"fixed_isotropic", "fully_factored"}

        fixed, factored = by_mode["fixed_isotropic"], by_mode["fully_factored"]
        assert fixed.sigma_unchanged
        assert fixed.n_variances == 1
        assert factored.n_variances == 2 * tiny_model_config.d_style
        assert not factored.sigma_unchanged
        for result in results:
            assert not result.diverged
            assert result.control is not None and result.many_to_many is not None
            assert (tmp_path / "cells" / f"{result.cell_id}.json").exists()
        assert (tmp_path / ABLATION_SUMMARY_FILE).exists()
        assert "k2-fixed_isotropic-std" in (tmp_path / ABLATION_TABLE_FILE).read_text(encoding="utf-8")

        train = mocker.patch("control_tts.evaluation.ablation.create_train_state")
        again = run_ablations(
            TINY_GRID, context, tiny_model_config, tiny_train_config, eval_config, FAST_DECODE, tmp_path
        )
        train.assert_not_called()
        assert [r.serialize() for r in again] == [r.serialize() for r in results]

    def test_diverged_cell_is_recorded(self, context, tiny_model_config, tiny_train_config, mocker):
        """Test a non-finite loss marks the cell diverged and skips its evaluation."""
        mocker.patch.object(Trainer, "run", side_effect=NonFiniteLossError(0, {"smsd": float("nan")}))
        grid = AblationGrid(
            n_components=(2,), noise_modes=("isotropic",), variance_norm=(False,),
            default_k=2, default_mode="isotropic", train_steps=2,
        )
        (result,) = run_ablations(grid, context, tiny_model_config, tiny_train_config, decode=FAST_DECODE)
        assert result.diverged
        assert result.control is None and result.many_to_many is None
        assert result.final_losses == {}
