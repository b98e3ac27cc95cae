"""
Groebner basis solver for the self-calibration system f1 = f2 = f3 = f4 = 0.

The solver runs a fixed elimination template: five reduced row echelon forms
of coefficient matrices of growing size, each enlarged by multiplying chosen
rows with the unknowns a, b and p. The last six rows of the final reduced
matrix are the reduced Groebner basis of the zero-dimensional part of the
system (grevlex, a > b > p), from which the 6x6 action matrix of
multiplication by p is read off directly.
"""

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .polyexpand import (
    ConstraintSystem,
    DegenerateInstanceError,
    Monomial,
    expand_constraints,
    monomial_to_str,
    multiply_monomials,
)
from .solver_config import SolverConfig

Y1_BASIS: tuple[Monomial, ...] = (
    (3, 1, 0), (2, 2, 0), (1, 3, 0), (2, 1, 0), (3, 0, 1), (2, 1, 1), (1, 2, 1), (4, 0, 0),
    (0, 4, 0), (3, 0, 0), (1, 2, 0), (0, 3, 0), (2, 0, 1), (0, 2, 2), (1, 0, 2), (1, 1, 1),
    (0, 2, 1), (0, 3, 1), (2, 0, 0), (1, 1, 2), (2, 0, 2), (1, 1, 0), (0, 2, 0), (0, 1, 2),
    (0, 0, 3), (1, 0, 1), (0, 1, 1), (0, 0, 2), (1, 0, 0), (0, 1, 0), (0, 0, 1), (0, 0, 0),
)  # fmt: skip

Y4_BASIS: tuple[Monomial, ...] = (
    (2, 1, 0), (3, 0, 0), (1, 2, 0), (0, 3, 0), (2, 0, 1), (1, 0, 2), (1, 1, 1), (0, 2, 1),
    (2, 0, 0), (1, 1, 0), (0, 2, 0), (0, 1, 2), (0, 0, 3), (1, 0, 1), (0, 1, 1), (0, 0, 2),
    (1, 0, 0), (0, 1, 0), (0, 0, 1), (0, 0, 0),
)  # fmt: skip

# standard monomials of the quotient ring, the trailing columns of Y4
QUOTIENT_BASIS: tuple[Monomial, ...] = Y4_BASIS[14:]

A: Monomial = (1, 0, 0)
B: Monomial = (0, 1, 0)
P: Monomial = (0, 0, 1)

# 1-based row numbers of the template
STAGE1_ROW = 4
STAGE2_ROWS = (6, 7)
STAGE3_ROWS = (12, 13)
STAGE4_KEPT_ROWS = (4, 10, 11, 12, 13, 16, 17, 19)
STAGE4_ROW = 19
STAGE5_ROW = 11

EXPECTED_SHAPES = ((4, 22), (7, 32), (13, 32), (19, 32), (11, 20), (14, 20))


@dataclass
class EliminationStage:
    """One step of the elimination template: B_i, its reduced form and its monomial basis."""

    index: int
    matrix: np.ndarray = field(repr=False)
    reduced: np.ndarray = field(repr=False)
    basis: tuple[Monomial, ...] = field(repr=False)

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape


@dataclass
class EliminationTrace:
    """
    Record of the full elimination template.

    Attributes:
        stages (list[EliminationStage]): B0..B5 with their reduced forms.
        divisibility_residual (float): Largest relative coefficient of the rows
            divided by p on monomials not divisible by p.
    """

    stages: list[EliminationStage]
    divisibility_residual: float = 0.0

    @property
    def shapes(self) -> list[tuple[int, int]]:
        return [stage.shape for stage in self.stages]

    @property
    def final_reduced(self) -> np.ndarray:
        return self.stages[-1].reduced

    @property
    def groebner_basis(self) -> np.ndarray:
        """The six Groebner basis polynomials as rows over Y4_BASIS."""
        return self.final_reduced[-6:]


@dataclass
class CalibrationSolution:
    """
    One real root (a, b, p) of the self-calibration system.

    Attributes:
        a (float): Principal point x (pixels).
        b (float): Principal point y (pixels).
        p (float): Squared focal length (pixels^2).
        eigenvalue (complex): The action matrix eigenvalue the root came from.
    """

    a: float
    b: float
    p: float
    eigenvalue: complex = 0.0

    @property
    def f(self) -> float:
        return float(np.sqrt(self.p))

    @property
    def K(self) -> np.ndarray:
        return np.array([[self.f, 0.0, self.a], [0.0, self.f, self.b], [0.0, 0.0, 1.0]])


@dataclass
class SolverOutput:
    """
    Everything the solver found for one (F, tau) instance.

    Attributes:
        solutions (list[CalibrationSolution]): Feasible solutions, by descending p.
        eigenvalues (np.ndarray): All six eigenvalues of the action matrix.
        n_real (int): Number of real finite roots (any sign of p).
        trace (EliminationTrace): The elimination record.
    """

    solutions: list[CalibrationSolution]
    eigenvalues: np.ndarray
    n_real: int
    trace: EliminationTrace = field(repr=False)

    @property
    def n_feasible(self) -> int:
        return len(self.solutions)


def _row_to_terms(row: np.ndarray, basis: Sequence[Monomial]) -> dict[Monomial, float]:
    return {m: c for m, c in zip(basis, row) if c != 0.0}


def _terms_to_row(
    terms: dict[Monomial, float],
    basis: Sequence[Monomial],
    tolerance: float,
    context: str,
) -> np.ndarray:
    """
    Express a polynomial over a basis. Monomials outside the basis must carry
    (numerically) zero coefficients and are dropped.
    """
    index = {m: i for i, m in enumerate(basis)}
    row = np.zeros(len(basis))
    scale = max((abs(c) for c in terms.values()), default=0.0)
    for monomial, coefficient in terms.items():
        if monomial in index:
            row[index[monomial]] = coefficient
        elif abs(coefficient) > tolerance * scale:
            raise DegenerateInstanceError(
                f"{context}: monomial {monomial_to_str(monomial)} has relative coefficient "
                f"{abs(coefficient) / scale:.2e} but is not in the monomial basis."
            )
    return row


def _shift_row(
    row: np.ndarray,
    basis: Sequence[Monomial],
    shift: Monomial,
    target_basis: Sequence[Monomial],
    tolerance: float,
    context: str,
) -> np.ndarray:
    """Multiply the polynomial of a row by a monomial and express it over target_basis."""
    terms = {multiply_monomials(m, shift): c for m, c in _row_to_terms(row, basis).items()}
    return _terms_to_row(terms, target_basis, tolerance, context)


def _divide_row_by_p(
    row: np.ndarray, basis: Sequence[Monomial]
) -> tuple[dict[Monomial, float], float]:
    """
    Divide the polynomial of a row by p. Coefficients on monomials without p
    are set to zero before the division.

    Returns:
        tuple: The quotient terms and the largest zeroed |coefficient| relative
        to the largest |coefficient| of the row.
    """
    scale = np.max(np.abs(row))
    quotient = {}
    residual = 0.0
    for (i, j, k), c in _row_to_terms(row, basis).items():
        if k == 0:
            residual = max(residual, abs(c) / scale)
        else:
            quotient[(i, j, k - 1)] = c
    return quotient, residual


def reduced_row_echelon(B: np.ndarray, config: SolverConfig | None = None) -> np.ndarray:
    """
    Reduced row echelon form of an m x n matrix whose leading m x m block is
    invertible, i.e. the pivots are the first m columns.

    Rows are scaled to unit max-norm, the leading block is LU-factorized with
    partial pivoting and the whole matrix is multiplied by its inverse.

    Args:
        B (np.ndarray): The matrix.
        config (SolverConfig, optional): Tolerances.

    Returns:
        np.ndarray: The reduced matrix with an exact identity leading block.

    Raises:
        DegenerateInstanceError: If a pivot is below the pivot tolerance.
    """
    config = config or SolverConfig()
    m = B.shape[0]
    row_scale = np.max(np.abs(B), axis=1)
    if np.any(row_scale == 0.0):
        raise DegenerateInstanceError("Zero row in the elimination template.")
    scaled = B / row_scale[:, None]

    left = scaled[:, :m]
    column_scale = np.max(np.abs(left), axis=0)
    lu, piv = lu_factor(left, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if np.any(pivots <= config.pivot_tolerance * column_scale):
        k = int(np.argmin(pivots / np.maximum(column_scale, np.finfo(float).tiny)))
        raise DegenerateInstanceError(
            f"Vanishing pivot in column {k + 1} of a {B.shape[0]}x{B.shape[1]} template matrix."
        )

    reduced = lu_solve((lu, piv), scaled, check_finite=False)
    reduced[:, :m] = np.eye(m)
    return reduced


def eliminate(
    system: ConstraintSystem, config: SolverConfig | None = None
) -> EliminationTrace:
    """
    Run the five-stage elimination template on B0.

    Args:
        system (ConstraintSystem): The 4x22 constraint system.
        config (SolverConfig, optional): Tolerances.

    Returns:
        EliminationTrace: All template matrices and their reduced forms.

    Raises:
        DegenerateInstanceError: On a vanishing pivot or if a structural zero
            of the template is violated beyond tolerance.
    """
    config = config or SolverConfig()
    tol = config.structural_tolerance
    stages = []

    # B0 over y0
    B0 = system.B0
    R0 = reduced_row_echelon(B0, config)
    stages.append(EliminationStage(0, B0, R0, tuple(system.basis)))

    # B1: reduced B0 over y1, plus a, b, p times its last row (a cubic)
    rows = [_terms_to_row(_row_to_terms(r, system.basis), Y1_BASIS, tol, "stage 1") for r in R0]
    last = R0[STAGE1_ROW - 1]
    rows += [_shift_row(last, system.basis, s, Y1_BASIS, tol, "stage 1") for s in (A, B, P)]
    B1 = np.vstack(rows)
    R1 = reduced_row_echelon(B1, config)
    stages.append(EliminationStage(1, B1, R1, Y1_BASIS))

    # B2: rows 6, 7 of the reduced B1 are divisible by p
    rows = list(R1)
    divisibility_residual = 0.0
    for i in STAGE2_ROWS:
        quotient, residual = _divide_row_by_p(R1[i - 1], Y1_BASIS)
        divisibility_residual = max(divisibility_residual, residual)
        rows.append(_terms_to_row(quotient, Y1_BASIS, tol, "stage 2"))
        for s in (A, B):
            shifted = {multiply_monomials(m, s): c for m, c in quotient.items()}
            rows.append(_terms_to_row(shifted, Y1_BASIS, tol, "stage 2"))
    if divisibility_residual > tol:
        raise DegenerateInstanceError(
            f"Rows {STAGE2_ROWS} of the stage 1 matrix are not divisible by p "
            f"(relative residual {divisibility_residual:.2e})."
        )
    B2 = np.vstack(rows)
    R2 = reduced_row_echelon(B2, config)
    stages.append(EliminationStage(2, B2, R2, Y1_BASIS))

    # B3: a, b, p multiples of rows 12, 13
    rows = list(R2)
    for i in STAGE3_ROWS:
        rows += [_shift_row(R2[i - 1], Y1_BASIS, s, Y1_BASIS, tol, "stage 3") for s in (A, B, P)]
    B3 = np.vstack(rows)
    R3 = reduced_row_echelon(B3, config)
    stages.append(EliminationStage(3, B3, R3, Y1_BASIS))

    # B4: drop quartic rows and columns, continue with degree <= 3 over y4
    rows = [_terms_to_row(_row_to_terms(R3[i - 1], Y1_BASIS), Y4_BASIS, tol, "stage 4") for i in STAGE4_KEPT_ROWS]
    rows += [_shift_row(R3[STAGE4_ROW - 1], Y1_BASIS, s, Y4_BASIS, tol, "stage 4") for s in (A, B, P)]
    B4 = np.vstack(rows)
    R4 = reduced_row_echelon(B4, config)
    stages.append(EliminationStage(4, B4, R4, Y4_BASIS))

    # B5: a, b, p multiples of row 11
    rows = list(R4)
    rows += [_shift_row(R4[STAGE5_ROW - 1], Y4_BASIS, s, Y4_BASIS, tol, "stage 5") for s in (A, B, P)]
    B5 = np.vstack(rows)
    R5 = reduced_row_echelon(B5, config)
    stages.append(EliminationStage(5, B5, R5, Y4_BASIS))

    return EliminationTrace(stages=stages, divisibility_residual=divisibility_residual)


def action_matrix(trace: EliminationTrace) -> np.ndarray:
    """
    The 6x6 matrix of multiplication by p on the quotient basis
    (bp, p^2, a, b, p, 1).

    Args:
        trace (EliminationTrace): A completed elimination.

    Returns:
        np.ndarray: M_p, with M_p @ m(x) = p * m(x) at every root x.
    """
    C = trace.final_reduced[-6:, -6:]
    Mp = np.zeros((6, 6))
    Mp[:3] = -C[3:]
    Mp[3, 0] = 1.0
    Mp[4, 1] = 1.0
    Mp[5, 4] = 1.0
    return Mp


def _is_real(value: complex, tolerance: float) -> bool:
    return abs(value.imag) <= tolerance * (1.0 + abs(value.real))


def eigen_roots(
    Mp: np.ndarray, config: SolverConfig | None = None
) -> list[tuple[complex, complex, complex, complex]]:
    """
    All finite roots (a, b, p) encoded by the eigenvectors of M_p.

    Args:
        Mp (np.ndarray): The action matrix.
        config (SolverConfig, optional): Tolerances.

    Returns:
        list[tuple]: (eigenvalue, a, b, p) per finite eigenvector, complex valued.
    """
    config = config or SolverConfig()
    eigenvalues, eigenvectors = np.linalg.eig(Mp)
    roots = []
    for k in range(len(eigenvalues)):
        v = eigenvectors[:, k]
        if abs(v[5]) < config.infinity_tolerance * np.linalg.norm(v):
            continue
        v = v / v[5]
        roots.append((complex(eigenvalues[k]), complex(v[2]), complex(v[3]), complex(v[4])))
    return roots


def _real_roots(
    Mp: np.ndarray, config: SolverConfig
) -> tuple[np.ndarray, list[CalibrationSolution]]:
    eigenvalues = np.linalg.eigvals(Mp)
    real = []
    for eigenvalue, a, b, p in eigen_roots(Mp, config):
        if not all(_is_real(x, config.complex_tolerance) for x in (eigenvalue, a, b, p)):
            continue
        real.append(CalibrationSolution(a=a.real, b=b.real, p=p.real, eigenvalue=eigenvalue))
    return eigenvalues, real


def extract_solutions(
    Mp: np.ndarray, config: SolverConfig | None = None
) -> list[CalibrationSolution]:
    """
    Feasible calibrations from the eigenvectors of the action matrix: real
    roots with p > 0, sorted by descending p.

    Args:
        Mp (np.ndarray): The action matrix.
        config (SolverConfig, optional): Tolerances.

    Returns:
        list[CalibrationSolution]: At most six solutions, possibly none.
    """
    config = config or SolverConfig()
    _, real = _real_roots(Mp, config)
    feasible = [s for s in real if s.p > config.min_p]
    return sorted(feasible, key=lambda s: s.p, reverse=True)


def solve_calibration(
    F: np.ndarray, tau: float, config: SolverConfig | None = None
) -> SolverOutput:
    """
    Solve the self-calibration system for one fundamental matrix and rotation
    trace, keeping the intermediate results.

    Args:
        F (np.ndarray): Rank-2 fundamental matrix (normalized coordinates).
        tau (float): Trace of the relative rotation.
        config (SolverConfig, optional): Tolerances.

    Returns:
        SolverOutput: Feasible solutions, eigenvalues and counts.
    """
    config = config or SolverConfig()
    system = expand_constraints(F, tau, config)
    trace = eliminate(system, config)
    Mp = action_matrix(trace)
    eigenvalues, real = _real_roots(Mp, config)
    feasible = sorted((s for s in real if s.p > config.min_p), key=lambda s: s.p, reverse=True)
    return SolverOutput(
        solutions=feasible, eigenvalues=eigenvalues, n_real=len(real), trace=trace
    )


def self_calibrate(
    F: np.ndarray, tau: float, config: SolverConfig | None = None
) -> list[CalibrationSolution]:
    """
    Internal calibrations (a, b, f) compatible with F and the rotation trace tau.

    Solutions are in the coordinates of F; for normalized points the caller
    maps K back with S^-1 K.

    Args:
        F (np.ndarray): Rank-2 fundamental matrix.
        tau (float): Trace of the relative rotation, 2 cos(theta) + 1.
        config (SolverConfig, optional): Tolerances.

    Returns:
        list[CalibrationSolution]: Feasible solutions by descending p.

    Raises:
        DegenerateInstanceError: If the instance is too close to degenerate.
    """
    return solve_calibration(F, tau, config).solutions
