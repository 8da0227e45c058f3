"""Package-wide constants.

File names of every artifact, process exit codes and environment variable
names used by the command line and the persistence adapters.

Author:
    Michael Economou

Date:
    2026-10-17
"""

DEFAULT_SEED = 7

# Environment
DATA_ROOT_ENV = "CONTROL_TTS_DATA_ROOT"

# Artifact file names
MANIFEST_FILE = "manifest.json"
RESOLVED_CONFIG_FILE = "resolved_config.json"
TRAIN_LOG_FILE = "train_log.jsonl"
CHECKPOINT_FILE = "checkpoint.pt"
DIAGNOSTIC_FILE = "diagnostic.json"
REPORT_FILE = "eval_report.jsonl"
ABLATION_SUMMARY_FILE = "ablation_summary.json"
ABLATION_TABLE_FILE = "ablation_table.txt"
SPLIT_FILE_SUFFIX = ".jsonl"

SPLITS = ("train", "test", "heldout_style", "heldout_speaker", "many_to_many")
EVAL_SPLITS = ("test", "heldout_style", "heldout_speaker")

# Exit codes
EXIT_OK = 0
EXIT_INVARIANT_FAILURE = 2
EXIT_CONFIG_ERROR = 3
