from .solver_config import SolverConfig
from .polyexpand import (
    Y0_BASIS,
    ConstraintSystem,
    DegenerateInstanceError,
    Poly3,
    constraint_polynomials,
    evaluate_basis,
    evaluate_constraints,
    expand_constraints,
    monomial_vector,
    omega_star,
    omega_star_symbolic,
)
from .gbsolver import (
    Y1_BASIS,
    Y4_BASIS,
    QUOTIENT_BASIS,
    CalibrationSolution,
    EliminationTrace,
    SolverOutput,
    action_matrix,
    eliminate,
    extract_solutions,
    reduced_row_echelon,
    self_calibrate,
    solve_calibration,
)

__all__ = [
    "SolverConfig",
    "Y0_BASIS",
    "ConstraintSystem",
    "DegenerateInstanceError",
    "Poly3",
    "constraint_polynomials",
    "evaluate_basis",
    "evaluate_constraints",
    "expand_constraints",
    "monomial_vector",
    "omega_star",
    "omega_star_symbolic",
    "Y1_BASIS",
    "Y4_BASIS",
    "QUOTIENT_BASIS",
    "CalibrationSolution",
    "EliminationTrace",
    "SolverOutput",
    "action_matrix",
    "eliminate",
    "extract_solutions",
    "reduced_row_echelon",
    "self_calibrate",
    "solve_calibration",
]
