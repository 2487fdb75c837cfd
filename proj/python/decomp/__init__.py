"""Guidance-behaviour decomposition: pipeline runner and core numerics."""

from ._core import (
    TRAJECTORY_COLUMNS,
    ConvergenceError,
    Error,
    ParseError,
    StageError,
    ValidationError,
    class_similarity,
    label_constraints,
    load_trajectory,
    run,
    run_manifest,
    sice,
    stage_names,
    step,
    viterbi,
)

__all__ = [
    "TRAJECTORY_COLUMNS",
    "ConvergenceError",
    "Error",
    "ParseError",
    "StageError",
    "ValidationError",
    "class_similarity",
    "label_constraints",
    "load_trajectory",
    "run",
    "run_manifest",
    "sice",
    "stage_names",
    "step",
    "viterbi",
]
