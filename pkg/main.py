#!/usr/bin/env python
"""Main entry point for the control-tts command line.

Thin wrapper so the tool can be run from a source checkout without
installing the package.

Example:
    Generate a corpus and train on it::

        $ python main.py gen-data --out runs/data --seed 7
        $ python main.py train --data runs/data --out runs/model

Author:
    Michael Economou

Date:
    2026-10-17
"""

import sys

from config import APP_NAME, APP_VERSION, DEFAULT_LOG_DIR
from control_tts.cli import main

if __name__ == "__main__":
    sys.exit(main(prog=f"{APP_NAME} {APP_VERSION}", default_log_dir=DEFAULT_LOG_DIR))
