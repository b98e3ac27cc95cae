from .pipeline_config import FilterConfig
from .pipeline_fcts import (
    ACCEPTED,
    REJECTED_ANGLE,
    REJECTED_CHEIRALITY,
    REJECTED_DEGENERATE,
    REJECTED_NO_SOLUTION,
    REJECTED_RESIDUAL,
    REJECTED_TRACE,
    REJECTED_WINDOW,
    CalibrationReport,
    Candidate,
    PairResult,
    PairSolution,
    aggregate_calibration,
    calibrate_pair,
    calibrate_pairs,
    calibrated_points,
    in_window,
    recover_pose,
    select_candidate,
    solve_pair,
)

__all__ = [
    "FilterConfig",
    "ACCEPTED",
    "REJECTED_ANGLE",
    "REJECTED_CHEIRALITY",
    "REJECTED_DEGENERATE",
    "REJECTED_NO_SOLUTION",
    "REJECTED_RESIDUAL",
    "REJECTED_TRACE",
    "REJECTED_WINDOW",
    "CalibrationReport",
    "Candidate",
    "PairResult",
    "PairSolution",
    "aggregate_calibration",
    "calibrate_pair",
    "calibrate_pairs",
    "calibrated_points",
    "in_window",
    "recover_pose",
    "select_candidate",
    "solve_pair",
]
