from .twoview import (
    Correspondences,
    DegenerateConfigurationError,
    denormalize_calibration,
    denormalize_fundamental,
    design_matrix,
    enforce_rank_two,
    epipolar_residual,
    epipolar_residuals,
    estimate_fundamental,
    fundamental_from_pose,
    normalize,
    normalize_fundamental,
    skew,
    solve_fundamental_7pt,
    solve_fundamental_npt,
)
from .pose import (
    CheiralityError,
    RelativePose,
    decompose_essential,
    essential_from_f,
    essential_residual,
    rotation_error_deg,
    trace_constraint_residual,
    trace_quadratic_roots,
    translation_error_deg,
    triangulate_midpoint,
    twisted_pair,
)

__all__ = [
    "Correspondences",
    "DegenerateConfigurationError",
    "denormalize_calibration",
    "denormalize_fundamental",
    "design_matrix",
    "enforce_rank_two",
    "epipolar_residual",
    "epipolar_residuals",
    "estimate_fundamental",
    "fundamental_from_pose",
    "normalize",
    "normalize_fundamental",
    "skew",
    "solve_fundamental_7pt",
    "solve_fundamental_npt",
    "CheiralityError",
    "RelativePose",
    "decompose_essential",
    "essential_from_f",
    "essential_residual",
    "rotation_error_deg",
    "trace_constraint_residual",
    "trace_quadratic_roots",
    "translation_error_deg",
    "triangulate_midpoint",
    "twisted_pair",
]
