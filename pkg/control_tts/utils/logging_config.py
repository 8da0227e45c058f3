"""Process-wide logging setup for the command line.

Every subcommand logs to the console at the requested level. When a log
directory is given, a run also leaves two files behind, named after the
subcommand and its start time:

    - {command}_{timestamp}.log: everything from DEBUG up
    - {command}_{timestamp}.errors.log: ERROR and CRITICAL only

so a long training run keeps its full trace next to a short error log that
is quick to check.

Author:
    Michael Economou

Date:
    2026-10-17
"""

from __future__ import annotations

import logging
import sys
from datetime import datetime
from pathlib import Path

LOG_FORMAT = "[%(asctime)s] [%(levelname)s] [%(run)s] [%(name)s] %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"

# Third-party loggers that flood DEBUG output.
QUIET_LOGGERS = ("torch", "filelock", "fsspec")


class RunNameFilter(logging.Filter):
    """Stamp every record with the name of the running subcommand."""

    def __init__(self, run_name: str) -> None:
        super().__init__()
        self.run_name = run_name

    def filter(self, record: logging.LogRecord) -> bool:
        record.run = self.run_name
        return True


def _handler(handler: logging.Handler, level: int, run_filter: logging.Filter) -> logging.Handler:
    handler.setLevel(level)
    handler.setFormatter(logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT))
    handler.addFilter(run_filter)
    return handler


def setup_logging(
    log_dir: str | Path | None = "logs",
    log_level: int = logging.INFO,
    run_name: str = "control_tts",
) -> Path | None:
    """Replace the root handlers with console and optional file handlers.

    Args:
        log_dir: Directory for the log files, created if missing. None
            logs to the console only.
        log_level: Minimum level shown on the console.
        run_name: Subcommand name, used in every record and in file names.

    Returns:
        Path of the full log file, or None without a log directory.
    """
    root_logger = logging.getLogger()
    root_logger.setLevel(logging.DEBUG)
    for handler in list(root_logger.handlers):
        root_logger.removeHandler(handler)
        handler.close()
    for name in QUIET_LOGGERS:
        logging.getLogger(name).setLevel(logging.WARNING)

    run_filter = RunNameFilter(run_name)
    root_logger.addHandler(_handler(logging.StreamHandler(sys.stderr), log_level, run_filter))
    if log_dir is None:
        return None

    directory = Path(log_dir)
    directory.mkdir(parents=True, exist_ok=True)
    stem = f"{run_name}_{datetime.now().strftime('%Y%m%d_%H%M%S')}"
    full_log = directory / f"{stem}.log"
    root_logger.addHandler(_handler(logging.FileHandler(full_log, encoding="utf-8"), logging.DEBUG, run_filter))
    root_logger.addHandler(
        _handler(logging.FileHandler(directory / f"{stem}.errors.log", encoding="utf-8"), logging.ERROR, run_filter)
    )
    return full_log
