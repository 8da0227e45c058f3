"""Evaluation: oracle metrics, control and many-to-many studies, ablation grids.

Author:
    Michael Economou

Date:
    2026-10-17
"""

from control_tts.evaluation.ablation import (
    AblationCell,
    AblationGrid,
    AblationResult,
    AblationRunner,
    render_ablation_table,
    run_ablations,
    sigma_snapshot,
)
from control_tts.evaluation.control import (
    EvalConfig,
    EvalReport,
    chance_failures,
    chance_levels,
    check_split_hygiene,
    eval_control,
    eval_many_to_many,
    render_reports,
    score_codecs,
)
from control_tts.evaluation.metrics import (
    edit_distance,
    entropy,
    speaker_auc,
    token_error_rate,
    wilson_interval,
)

__all__ = [
    "AblationCell",
    "AblationGrid",
    "AblationResult",
    "AblationRunner",
    "EvalConfig",
    "EvalReport",
    "chance_failures",
    "chance_levels",
    "check_split_hygiene",
    "edit_distance",
    "entropy",
    "eval_control",
    "eval_many_to_many",
    "render_ablation_table",
    "render_reports",
    "run_ablations",
    "score_codecs",
    "sigma_snapshot",
    "speaker_auc",
    "token_error_rate",
    "wilson_interval",
]
