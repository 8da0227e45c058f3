"""Tests for the logging setup."""

import logging

import pytest

from control_tts.utils import setup_logging


@pytest.fixture(autouse=True)
def restore_root_handlers():
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    yield
    for handler in list(root.handlers):
        root.removeHandler(handler)
        handler.close()
    for handler in handlers:
        root.addHandler(handler)
    root.setLevel(level)


class TestSetupLogging:
    """Test suite for setup_logging."""

    def test_console_only(self):
        """Test no log directory gives a single console handler."""
        assert setup_logging(None, logging.WARNING) is None
        handlers = logging.getLogger().handlers
        assert len(handlers) == 1
        assert handlers[0].level == logging.WARNING

    def test_files_split_by_severity(self, tmp_path):
        """Test the full log holds every record and the error log only errors."""
        full_log = setup_logging(tmp_path / "logs", logging.ERROR, run_name="train")
        assert full_log is not None and full_log.name.startswith("train_")
        log = logging.getLogger("control_tts.test")
        log.debug("debug detail")
        log.error("bad thing")
        for handler in logging.getLogger().handlers:
            handler.flush()

        text = full_log.read_text(encoding="utf-8")
        assert "debug detail" in text and "bad thing" in text
        assert "[train]" in text
        (errors,) = (tmp_path / "logs").glob("*.errors.log")
        assert errors.read_text(encoding="utf-8").count("\n") == 1

    def test_repeated_setup_replaces_handlers(self):
        """Test calling setup twice does not duplicate handlers."""
        setup_logging(None)
        setup_logging(None)
        assert len(logging.getLogger().handlers) == 1
