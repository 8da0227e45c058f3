"""Tests for the command-line surface and its exit codes."""

import logging

import pytest

from control_tts.cli import _load_grid, build_parser, main
from control_tts.constants import (
    DATA_ROOT_ENV,
    EXIT_CONFIG_ERROR,
    EXIT_OK,
    MANIFEST_FILE,
    RESOLVED_CONFIG_FILE,
)
from control_tts.persistence import read_json
from control_tts.run_config import ConfigError, RunConfig
from tests.conftest import TINY_OVERRIDES

SETS = [arg for override in TINY_OVERRIDES for arg in ("--set", override)]


def run_cli(*args):
    return main([*args, "--log-dir", "", *SETS])


@pytest.fixture(autouse=True)
def restore_root_handlers():
    """Put back the root handlers that setup_logging replaces."""
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    yield
    for handler in list(root.handlers):
        root.removeHandler(handler)
    for handler in handlers:
        root.addHandler(handler)
    root.setLevel(level)


class TestParser:
    """Test suite for argument parsing."""

    def test_command_required(self):
        """Test running without a subcommand exits with a usage error."""
        with pytest.raises(SystemExit):
            build_parser().parse_args([])

    def test_data_root_from_environment(self, monkeypatch):
        """Test the default corpus directory follows the environment variable."""
        monkeypatch.setenv(DATA_ROOT_ENV, "/tmp/corpora")
        args = build_parser().parse_args(["gen-data"])
        assert args.out == "/tmp/corpora"

    def test_repeated_set_collected(self):
        """Test every --set flag is kept in order."""
        args = build_parser().parse_args(["gen-data", "--set", "a.b=1", "--set", "c.d=2"])
        assert args.set == ["a.b=1", "c.d=2"]


class TestGenData:
    """Test suite for the gen-data subcommand."""

    def test_same_seed_gives_identical_files(self, tmp_path):
        """Test two runs with one seed write byte-identical corpora."""
        first, second = tmp_path / "a", tmp_path / "b"
        assert run_cli("gen-data", "--out", str(first), "--seed", "5") == EXIT_OK
        assert run_cli("gen-data", "--out", str(second), "--seed", "5") == EXIT_OK
        names = sorted(p.name for p in first.iterdir())
        assert MANIFEST_FILE in names and RESOLVED_CONFIG_FILE in names
        assert names == sorted(p.name for p in second.iterdir())
        for name in names:
            assert (first / name).read_bytes() == (second / name).read_bytes(), name

    def test_seed_changes_corpus(self, tmp_path):
        """Test another seed gives different split contents."""
        run_cli("gen-data", "--out", str(tmp_path / "a"), "--seed", "5")
        run_cli("gen-data", "--out", str(tmp_path / "b"), "--seed", "6")
        hashes = [read_json(tmp_path / d / MANIFEST_FILE)["splits"]["train"]["sha256"] for d in "ab"]
        assert hashes[0] != hashes[1]

    def test_existing_output_needs_force(self, tmp_path, capsys):
        """Test reusing an output directory fails with exit 3 unless forced."""
        out = str(tmp_path / "data")
        assert run_cli("gen-data", "--out", out) == EXIT_OK
        assert run_cli("gen-data", "--out", out) == EXIT_CONFIG_ERROR
        assert run_cli("gen-data", "--out", out, "--force") == EXIT_OK
        assert "corpus written" in capsys.readouterr().out

    def test_resolved_config_records_overrides(self, tmp_path):
        """Test the written configuration holds the --set values and its hash."""
        out = tmp_path / "data"
        run_cli("gen-data", "--out", str(out))
        resolved = read_json(out / RESOLVED_CONFIG_FILE)
        assert resolved["config"]["data"]["n_train"] == 24
        assert len(resolved["config_hash"]) == 64


class TestExitCodes:
    """Test suite for configuration and input errors."""

    @pytest.mark.parametrize("override", ["data.nope=1", "data.n_train=lots", "train.total_steps=0", "oops"])
    def test_bad_override(self, tmp_path, override):
        """Test unknown, mistyped or invalid overrides exit with 3."""
        code = main(["gen-data", "--out", str(tmp_path / "d"), "--log-dir", "", "--set", override])
        assert code == EXIT_CONFIG_ERROR
        assert not (tmp_path / "d").exists()

    def test_missing_config_file(self, tmp_path):
        """Test a missing --config file exits with 3."""
        assert run_cli("gen-data", "--out", str(tmp_path), "--config", str(tmp_path / "no.yaml")) == 3

    def test_non_positive_sample_count(self, tmp_path):
        """Test synth --n 0 exits with 3 before touching the checkpoint."""
        code = run_cli(
            "synth", "--ckpt", str(tmp_path / "c.pt"), "--style-text", "x", "--timbre-from", "0", "--n", "0"
        )
        assert code == EXIT_CONFIG_ERROR

    def test_missing_checkpoint(self, tmp_path):
        """Test synth and eval with a missing checkpoint exit with 3."""
        ckpt = str(tmp_path / "missing.pt")
        assert run_cli("synth", "--ckpt", ckpt, "--style-text", "a happy voice", "--timbre-from", "0") == 3
        assert run_cli("eval", "--ckpt", ckpt, "--data", str(tmp_path)) == EXIT_CONFIG_ERROR

    def test_missing_corpus(self, tmp_path):
        """Test training on a directory without a manifest exits with 3."""
        assert run_cli("train", "--data", str(tmp_path), "--out", str(tmp_path / "run")) == EXIT_CONFIG_ERROR

    def test_resume_without_checkpoint(self, tmp_path):
        """Test --resume with nothing to resume exits with 3."""
        data = str(tmp_path / "data")
        run_cli("gen-data", "--out", data)
        code = run_cli("train", "--data", data, "--out", str(tmp_path / "run"), "--resume")
        assert code == EXIT_CONFIG_ERROR


class TestGridFile:
    """Test suite for reading ablation grids."""

    def test_grid_applied_from_yaml(self, tmp_path):
        """Test a YAML grid replaces the ablation section and keeps tuples."""
        path = tmp_path / "grid.yaml"
        path.write_text("ablation:\n  n_components: [2, 4]\n  product: true\n  train_steps: 50\n", encoding="utf-8")
        grid = _load_grid(RunConfig(), str(path)).ablation
        assert grid.n_components == (2, 4)
        assert grid.product
        assert grid.train_steps == 50
        assert grid.variance_norm == (False, True)

    def test_bare_grid_without_section(self, tmp_path):
        """Test a grid file without an ablation key is read as the grid itself."""
        path = tmp_path / "grid.yaml"
        path.write_text("noise_modes: [isotropic]\n", encoding="utf-8")
        assert _load_grid(RunConfig(), str(path)).ablation.noise_modes == ("isotropic",)

    @pytest.mark.parametrize("text", ["- 1\n- 2\n", "ablation: [\n", "ablation:\n  nope: 1\n"])
    def test_bad_grid_rejected(self, tmp_path, text):
        """Test lists, broken YAML and unknown keys raise ConfigError."""
        path = tmp_path / "grid.yaml"
        path.write_text(text, encoding="utf-8")
        with pytest.raises(ConfigError):
            _load_grid(RunConfig(), str(path))

    def test_missing_grid_file(self, tmp_path):
        """Test a missing grid file raises ConfigError."""
        with pytest.raises(ConfigError, match="cannot read grid file"):
            _load_grid(RunConfig(), str(tmp_path / "none.yaml"))
