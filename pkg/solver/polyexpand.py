"""
Exact expansion of the self-calibration constraints in the unknowns (a, b, p).

The dual image of the absolute conic of a camera with Euclidean image plane is

    w* = K K^T = [[a^2 + p, ab, a], [ab, b^2 + p, b], [a, b, 1]],   p = f^2,

and with a fundamental matrix F and the rotation trace tau the two matrix
constraints

    G  = 1/2 tr(F w* F^T w*) F - F w* F^T w* F = 0
    f4 = 1/2 (tau^2 - 1) tr(F w* F^T w*) + (tau + 1) tr(w* F w* F) - tau tr^2(w* F) = 0

are polynomial in (a, b, p). The diagonal of G together with f4 forms the
system solved by the Groebner basis solver.
"""

import numbers
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from utils import SelfCalibrationError

from .solver_config import SolverConfig

Monomial = tuple[int, int, int]

# exponents of (a, b, p)
Y0_BASIS: tuple[Monomial, ...] = (
    (3, 1, 0),  # a^3 b
    (2, 2, 0),  # a^2 b^2
    (1, 3, 0),  # a b^3
    (2, 1, 0),  # a^2 b
    (4, 0, 0),  # a^4
    (0, 4, 0),  # b^4
    (3, 0, 0),  # a^3
    (1, 2, 0),  # a b^2
    (0, 3, 0),  # b^3
    (2, 0, 1),  # a^2 p
    (1, 1, 1),  # a b p
    (0, 2, 1),  # b^2 p
    (2, 0, 0),  # a^2
    (1, 1, 0),  # a b
    (0, 2, 0),  # b^2
    (1, 0, 1),  # a p
    (0, 1, 1),  # b p
    (0, 0, 2),  # p^2
    (1, 0, 0),  # a
    (0, 1, 0),  # b
    (0, 0, 1),  # p
    (0, 0, 0),  # 1
)

VARIABLES = ("a", "b", "p")


class DegenerateInstanceError(SelfCalibrationError):
    """
    Error for constraint systems that cannot be solved reliably, e.g. a zero
    fundamental matrix or a vanishing pivot during elimination.
    """

    pass


def monomial_to_str(monomial: Monomial) -> str:
    """
    Human readable form of a monomial, e.g. (2, 1, 0) -> "a^2*b".
    """
    factors = []
    for name, exponent in zip(VARIABLES, monomial):
        if exponent == 1:
            factors.append(name)
        elif exponent > 1:
            factors.append(f"{name}^{exponent}")
    return "*".join(factors) if factors else "1"


def multiply_monomials(first: Monomial, second: Monomial) -> Monomial:
    return (first[0] + second[0], first[1] + second[1], first[2] + second[2])


def monomial_vector(
    basis: Sequence[Monomial], a: complex, b: complex, p: complex
) -> np.ndarray:
    """
    Evaluate the monomials of a basis at a point.

    Args:
        basis (Sequence[Monomial]): The monomial basis.
        a, b, p: The point. Complex values are allowed.

    Returns:
        np.ndarray: Vector of monomial values in basis order.
    """
    dtype = complex if any(isinstance(v, complex) for v in (a, b, p)) else float
    return np.array([a**i * b**j * p**k for i, j, k in basis], dtype=dtype)


class Poly3:
    """
    Sparse polynomial in the three unknowns (a, b, p) with real coefficients,
    stored as a mapping from exponent triples to coefficients. Exact zero
    coefficients are never stored.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Monomial, float] | None = None):
        self.terms: dict[Monomial, float] = {}
        if terms:
            for monomial, coefficient in terms.items():
                if coefficient != 0.0:
                    self.terms[tuple(monomial)] = float(coefficient)

    @classmethod
    def constant(cls, value: float) -> "Poly3":
        return cls({(0, 0, 0): value})

    @classmethod
    def variable(cls, name: str) -> "Poly3":
        exponents = [0, 0, 0]
        exponents[VARIABLES.index(name)] = 1
        return cls({tuple(exponents): 1.0})

    @staticmethod
    def _coerce(other) -> "Poly3":
        if isinstance(other, Poly3):
            return other
        if isinstance(other, numbers.Real):
            return Poly3.constant(float(other))
        raise TypeError(f"Cannot combine Poly3 with {type(other).__name__}")

    def __add__(self, other) -> "Poly3":
        other = self._coerce(other)
        terms = dict(self.terms)
        for monomial, coefficient in other.terms.items():
            terms[monomial] = terms.get(monomial, 0.0) + coefficient
        return Poly3(terms)

    __radd__ = __add__

    def __neg__(self) -> "Poly3":
        return Poly3({m: -c for m, c in self.terms.items()})

    def __sub__(self, other) -> "Poly3":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Poly3":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Poly3":
        if isinstance(other, numbers.Real):
            scale = float(other)
            return Poly3({m: scale * c for m, c in self.terms.items()})
        other = self._coerce(other)
        terms: dict[Monomial, float] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = multiply_monomials(m1, m2)
                terms[m] = terms.get(m, 0.0) + c1 * c2
        return Poly3(terms)

    __rmul__ = __mul__

    def __repr__(self) -> str:
        if not self.terms:
            return "Poly3(0)"
        parts = [
            f"{c:+.6g}*{monomial_to_str(m)}"
            for m, c in sorted(self.terms.items(), reverse=True)
        ]
        return "Poly3(" + " ".join(parts) + ")"

    @property
    def degree(self) -> int:
        """Total degree, -1 for the zero polynomial."""
        return max((sum(m) for m in self.terms), default=-1)

    @property
    def max_abs_coefficient(self) -> float:
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def coefficient(self, monomial: Monomial) -> float:
        return self.terms.get(tuple(monomial), 0.0)

    def pruned(self, tolerance: float = 1e-12) -> "Poly3":
        """
        Drop coefficients below tolerance * (largest |coefficient|).
        """
        threshold = tolerance * self.max_abs_coefficient
        return Poly3({m: c for m, c in self.terms.items() if abs(c) > threshold})

    def evaluate(self, a: complex, b: complex, p: complex) -> complex:
        return sum(c * a**i * b**j * p**k for (i, j, k), c in self.terms.items())

    def coefficient_row(
        self, basis: Sequence[Monomial], tolerance: float = 1e-6
    ) -> np.ndarray:
        """
        Coefficients of the polynomial over a monomial basis.

        Args:
            basis (Sequence[Monomial]): The target basis.
            tolerance (float): Largest allowed |coefficient| outside the basis,
                relative to the largest coefficient of the polynomial.

        Returns:
            np.ndarray: The coefficient row.

        Raises:
            DegenerateInstanceError: If a monomial outside the basis carries a
                coefficient above tolerance.
        """
        index = {m: i for i, m in enumerate(basis)}
        row = np.zeros(len(basis))
        scale = self.max_abs_coefficient
        for monomial, coefficient in self.terms.items():
            if monomial in index:
                row[index[monomial]] = coefficient
            elif abs(coefficient) > tolerance * scale:
                raise DegenerateInstanceError(
                    f"Monomial {monomial_to_str(monomial)} with coefficient "
                    f"{coefficient:.3e} lies outside the monomial basis."
                )
        return row


PolyMatrix = list[list[Poly3]]


def _as_poly_matrix(M) -> PolyMatrix:
    if isinstance(M, np.ndarray):
        M = M.tolist()
    return [[Poly3._coerce(entry) for entry in row] for row in M]


def _matmul(A: PolyMatrix, B: PolyMatrix) -> PolyMatrix:
    return [[sum(A[i][k] * B[k][j] for k in range(3)) for j in range(3)] for i in range(3)]


def _transpose(A: PolyMatrix) -> PolyMatrix:
    return [[A[j][i] for j in range(3)] for i in range(3)]


def _trace(A: PolyMatrix) -> Poly3:
    return A[0][0] + A[1][1] + A[2][2]


def omega_star_symbolic() -> PolyMatrix:
    """
    The dual image of the absolute conic w* = K K^T as a 3x3 matrix of
    polynomials in (a, b, p).

    Returns:
        PolyMatrix: [[a^2 + p, ab, a], [ab, b^2 + p, b], [a, b, 1]].
    """
    a = Poly3.variable("a")
    b = Poly3.variable("b")
    p = Poly3.variable("p")
    one = Poly3.constant(1.0)
    return [
        [a * a + p, a * b, a],
        [a * b, b * b + p, b],
        [a, b, one],
    ]


@dataclass(frozen=True)
class ConstraintSystem:
    """
    The four polynomials f1..f4 written as B0 y0 = 0.

    Attributes:
        B0 (np.ndarray): 4x22 coefficient matrix, rows f1, f2, f3, f4.
        basis (tuple[Monomial, ...]): The monomial vector y0.
        G (PolyMatrix): All nine entries of the cubic matrix constraint.
        f4 (Poly3): The trace constraint.
    """

    B0: np.ndarray
    basis: tuple[Monomial, ...] = Y0_BASIS
    G: PolyMatrix = field(default_factory=list, repr=False)
    f4: Poly3 = field(default_factory=Poly3, repr=False)

    def residuals(self, a: complex, b: complex, p: complex) -> np.ndarray:
        """Values of f1..f4 at (a, b, p)."""
        return self.B0 @ monomial_vector(self.basis, a, b, p)


def _check_inputs(F: np.ndarray, tau: float, config: SolverConfig) -> np.ndarray:
    F = np.asarray(F, dtype=float)
    if F.shape != (3, 3):
        raise ValueError(f"F must be a 3x3 matrix, got shape {F.shape}.")
    if np.max(np.abs(F)) < config.zero_matrix_tolerance:
        raise DegenerateInstanceError("The fundamental matrix is (numerically) zero.")
    if not -1.0 - 1e-9 <= tau <= 3.0 + 1e-9:
        raise ValueError(f"The rotation trace must lie in [-1, 3], got {tau}.")
    return F


def constraint_polynomials(
    F: np.ndarray, tau: float, config: SolverConfig | None = None
) -> tuple[PolyMatrix, Poly3]:
    """
    Expand the cubic matrix constraint G and the trace constraint f4.

    Args:
        F (np.ndarray): The 3x3 fundamental matrix.
        tau (float): Trace of the relative rotation, in [-1, 3].
        config (SolverConfig, optional): Tolerances.

    Returns:
        tuple[PolyMatrix, Poly3]: The matrix G and the polynomial f4, pruned.
    """
    config = config or SolverConfig()
    F = _check_inputs(F, tau, config)

    W = omega_star_symbolic()
    Fp = _as_poly_matrix(F)
    Ftp = _as_poly_matrix(F.T)

    FWFt = _matmul(_matmul(Fp, W), Ftp)
    X = _matmul(FWFt, W)  # F w* F^T w*
    trace_X = _trace(X)
    XF = _matmul(X, Fp)
    G = [
        [(0.5 * trace_X * float(F[i, j]) - XF[i][j]).pruned(config.prune_tolerance) for j in range(3)]
        for i in range(3)
    ]

    WF = _matmul(W, Fp)
    trace_WF = _trace(WF)
    f4 = (
        0.5 * (tau**2 - 1.0) * trace_X
        + (tau + 1.0) * _trace(_matmul(WF, WF))
        - tau * (trace_WF * trace_WF)
    ).pruned(config.prune_tolerance)
    return G, f4


def expand_constraints(
    F: np.ndarray, tau: float, config: SolverConfig | None = None
) -> ConstraintSystem:
    """
    Build the 4x22 coefficient matrix B0 of f1 = G11, f2 = G22, f3 = G33 and f4
    over the monomial vector y0.

    Args:
        F (np.ndarray): The 3x3 fundamental matrix (any non-zero scale).
        tau (float): Trace of the relative rotation, in [-1, 3].
        config (SolverConfig, optional): Tolerances.

    Returns:
        ConstraintSystem: The coefficient matrix and the expanded polynomials.

    Raises:
        DegenerateInstanceError: If F is numerically zero.
        ValueError: If F is not 3x3 or tau is outside [-1, 3].
    """
    config = config or SolverConfig()
    G, f4 = constraint_polynomials(F, tau, config)
    rows = [G[0][0], G[1][1], G[2][2], f4]
    B0 = np.vstack(
        [poly.coefficient_row(Y0_BASIS, config.structural_tolerance) for poly in rows]
    )
    return ConstraintSystem(B0=B0, basis=Y0_BASIS, G=G, f4=f4)


def omega_star(a: float, b: float, p: float) -> np.ndarray:
    """Numeric w* = K K^T for K = [[f, 0, a], [0, f, b], [0, 0, 1]], p = f^2."""
    return np.array([[a * a + p, a * b, a], [a * b, b * b + p, b], [a, b, 1.0]])


def evaluate_constraints(
    F: np.ndarray, tau: float, a: float, b: float, p: float
) -> tuple[np.ndarray, float]:
    """
    Evaluate the constraints directly from their matrix form, without any
    polynomial expansion.

    Args:
        F (np.ndarray): The 3x3 fundamental matrix.
        tau (float): Trace of the relative rotation.
        a, b, p (float): The point at which to evaluate.

    Returns:
        tuple[np.ndarray, float]: The 3x3 matrix G and the scalar f4.
    """
    F = np.asarray(F, dtype=float)
    W = omega_star(a, b, p)
    X = F @ W @ F.T @ W
    G = 0.5 * np.trace(X) * F - X @ F
    WF = W @ F
    f4 = (
        0.5 * (tau**2 - 1.0) * np.trace(X)
        + (tau + 1.0) * np.trace(WF @ WF)
        - tau * np.trace(WF) ** 2
    )
    return G, float(f4)


def evaluate_basis(
    row: np.ndarray, basis: Sequence[Monomial], a: complex, b: complex, p: complex
) -> complex:
    """Value at (a, b, p) of the polynomial whose coefficients over basis are row."""
    return np.dot(row, monomial_vector(basis, a, b, p))
