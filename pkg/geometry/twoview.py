from dataclasses import dataclass

import numpy as np

from utils import SelfCalibrationError


class DegenerateConfigurationError(SelfCalibrationError):
    """
    Raised when a set of correspondences does not determine the two-view
    geometry (coincident points, rank deficient design matrix).
    """

    pass


@dataclass(frozen=True)
class Correspondences:
    """
    N point correspondences q_i <-> q'_i between two views.

    Attributes:
        x1 (np.ndarray): (N, 2) points in the first view.
        x2 (np.ndarray): (N, 2) points in the second view.
    """

    x1: np.ndarray
    x2: np.ndarray

    def __post_init__(self):
        x1 = np.atleast_2d(np.asarray(self.x1, dtype=float))
        x2 = np.atleast_2d(np.asarray(self.x2, dtype=float))
        if x1.shape != x2.shape or x1.ndim != 2 or x1.shape[1] != 2:
            raise ValueError(
                f"Correspondences need two (N, 2) arrays, got {x1.shape} and {x2.shape}."
            )
        object.__setattr__(self, "x1", x1)
        object.__setattr__(self, "x2", x2)

    def __len__(self) -> int:
        return self.x1.shape[0]

    @property
    def q(self) -> np.ndarray:
        """Homogeneous (N, 3) points of the first view."""
        return np.column_stack([self.x1, np.ones(len(self))])

    @property
    def q_prime(self) -> np.ndarray:
        """Homogeneous (N, 3) points of the second view."""
        return np.column_stack([self.x2, np.ones(len(self))])

    def subset(self, indices) -> "Correspondences":
        return Correspondences(self.x1[indices], self.x2[indices])

    def transformed(self, S: np.ndarray) -> "Correspondences":
        """Apply the same affine 3x3 transform to both views."""
        return Correspondences(_apply(S, self.x1), _apply(S, self.x2))


def _apply(S: np.ndarray, x: np.ndarray) -> np.ndarray:
    return x @ S[:2, :2].T + S[:2, 2]


def skew(v: np.ndarray) -> np.ndarray:
    """The cross product matrix [v]x."""
    return np.array([[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]])


def normalize_fundamental(F: np.ndarray) -> np.ndarray:
    """
    Scale a fundamental matrix to unit Frobenius norm with its largest-magnitude
    entry positive.
    """
    F = np.asarray(F, dtype=float)
    F = F / np.linalg.norm(F)
    if F.flat[np.argmax(np.abs(F))] < 0:
        F = -F
    return F


def normalize(
    corrs: Correspondences,
) -> tuple[np.ndarray, Correspondences]:
    """
    Hartley-style normalization with a single transform shared by both views:
    the 2N pooled points are moved to centroid zero and scaled to a mean
    distance of sqrt(2) from the origin.

    Args:
        corrs (Correspondences): At least 7 correspondences (pixels).

    Returns:
        tuple[np.ndarray, Correspondences]: S = [[g, 0, a], [0, g, b], [0, 0, 1]]
        and the transformed correspondences.

    Raises:
        ValueError: If fewer than 7 correspondences are given.
        DegenerateConfigurationError: If all points coincide.
    """
    if len(corrs) < 7:
        raise ValueError(f"At least 7 correspondences are required, got {len(corrs)}.")
    pooled = np.vstack([corrs.x1, corrs.x2])
    centroid = pooled.mean(axis=0)
    mean_distance = np.mean(np.linalg.norm(pooled - centroid, axis=1))
    if mean_distance <= np.finfo(float).eps * max(1.0, np.max(np.abs(pooled))):
        raise DegenerateConfigurationError("All points coincide, normalization undefined.")
    gamma = np.sqrt(2.0) / mean_distance
    S = np.array(
        [
            [gamma, 0.0, -gamma * centroid[0]],
            [0.0, gamma, -gamma * centroid[1]],
            [0.0, 0.0, 1.0],
        ]
    )
    return S, corrs.transformed(S)


def design_matrix(corrs: Correspondences) -> np.ndarray:
    """Rows A_i with A_i @ F.ravel() = q'_i^T F q_i."""
    return np.einsum("ni,nj->nij", corrs.q_prime, corrs.q).reshape(len(corrs), 9)


def _cubic_coefficients(F1: np.ndarray, F2: np.ndarray) -> np.ndarray:
    """Coefficients (highest first) of det(F1 + x F2), interpolated at four nodes."""
    nodes = np.array([-1.0, 0.0, 1.0, 2.0])
    values = np.array([np.linalg.det(F1 + x * F2) for x in nodes])
    return np.linalg.solve(np.vander(nodes, 4), values)


def _real_cubic_roots(coeffs: np.ndarray, discriminant_tolerance: float = 1e-10) -> np.ndarray:
    """
    Real roots of c3 x^3 + c2 x^2 + c1 x + c0 with c3 != 0.

    Closed form (Cardano for one real root, trigonometric form for three),
    falling back to companion matrix eigenvalues when the discriminant is
    close to zero. Every root is polished with two Newton steps.
    """
    c3, c2, c1, c0 = coeffs
    b, c, d = c2 / c3, c1 / c3, c0 / c3
    p = c - b * b / 3.0
    q = 2.0 * b**3 / 27.0 - b * c / 3.0 + d
    discriminant = (q / 2.0) ** 2 + (p / 3.0) ** 3
    scale = max((q / 2.0) ** 2, abs(p / 3.0) ** 3, np.finfo(float).tiny)

    if abs(discriminant) < discriminant_tolerance * scale:
        roots = np.roots(coeffs)
        roots = roots[np.abs(roots.imag) <= 1e-8 * (1.0 + np.abs(roots.real))].real
    elif discriminant > 0:
        s = np.sqrt(discriminant)
        roots = np.array([np.cbrt(-q / 2.0 + s) + np.cbrt(-q / 2.0 - s)]) - b / 3.0
    else:
        r = 2.0 * np.sqrt(-p / 3.0)
        phi = np.arccos(np.clip(3.0 * q / (p * r), -1.0, 1.0))
        k = np.arange(3)
        roots = r * np.cos(phi / 3.0 - 2.0 * np.pi * k / 3.0) - b / 3.0

    poly = np.poly1d(coeffs)
    dpoly = poly.deriv()
    for _ in range(2):
        slope = dpoly(roots)
        step = np.divide(poly(roots), slope, out=np.zeros_like(roots), where=slope != 0)
        roots = roots - step
    return np.sort(roots)


def solve_fundamental_7pt(corrs: Correspondences) -> list[np.ndarray]:
    """
    Minimal 7-point estimation of the fundamental matrix.

    Args:
        corrs (Correspondences): Exactly 7 correspondences.

    Returns:
        list[np.ndarray]: One to three rank-2 fundamental matrices, normalized.

    Raises:
        ValueError: If the number of correspondences is not 7.
        DegenerateConfigurationError: If the null space is not two-dimensional.
    """
    if len(corrs) != 7:
        raise ValueError(f"The 7-point solver needs exactly 7 correspondences, got {len(corrs)}.")
    A = design_matrix(corrs)
    _, s, Vt = np.linalg.svd(A, full_matrices=True)
    if s[-1] <= 1e-10 * s[0]:
        raise DegenerateConfigurationError(
            "The 7-point design matrix has a null space of dimension greater than two."
        )
    F1 = Vt[-2].reshape(3, 3)
    F2 = Vt[-1].reshape(3, 3)

    coeffs = _cubic_coefficients(F1, F2)
    solutions = []
    if abs(coeffs[0]) <= 1e-12 * np.max(np.abs(coeffs)):
        # det F2 = 0: F2 is a solution and the remaining ones solve a quadratic
        solutions.append(F2)
        roots = np.roots(coeffs[1:])
        roots = roots[np.abs(roots.imag) <= 1e-8 * (1.0 + np.abs(roots.real))].real
    else:
        roots = _real_cubic_roots(coeffs)
    solutions.extend(F1 + x * F2 for x in roots)
    return [normalize_fundamental(F) for F in solutions]


def enforce_rank_two(F: np.ndarray) -> np.ndarray:
    U, s, Vt = np.linalg.svd(F)
    s[2] = 0.0
    return U @ np.diag(s) @ Vt


def solve_fundamental_npt(corrs: Correspondences) -> np.ndarray:
    """
    Linear least-squares estimation of the fundamental matrix from N >= 8
    correspondences, followed by rank-2 enforcement.

    Args:
        corrs (Correspondences): At least 8 correspondences.

    Returns:
        np.ndarray: The normalized rank-2 fundamental matrix.

    Raises:
        ValueError: If fewer than 8 correspondences are given.
        DegenerateConfigurationError: If the design matrix has rank below 8.
    """
    if len(corrs) < 8:
        raise ValueError(f"The linear solver needs at least 8 correspondences, got {len(corrs)}.")
    A = design_matrix(corrs)
    _, s, Vt = np.linalg.svd(A, full_matrices=True)
    if s[7] <= 1e-10 * s[0]:
        raise DegenerateConfigurationError(
            "The design matrix has rank below 8, the fundamental matrix is not unique."
        )
    F = Vt[-1].reshape(3, 3)
    return normalize_fundamental(enforce_rank_two(F))


def estimate_fundamental(corrs: Correspondences) -> list[np.ndarray]:
    """The 7-point roots for N = 7, the linear estimate otherwise."""
    if len(corrs) == 7:
        return solve_fundamental_7pt(corrs)
    return [solve_fundamental_npt(corrs)]


def epipolar_residual(F: np.ndarray, q: np.ndarray, q_prime: np.ndarray) -> float:
    """|q'^T F q| for one pair of homogeneous points."""
    return float(abs(np.asarray(q_prime) @ F @ np.asarray(q)))


def epipolar_residuals(F: np.ndarray, corrs: Correspondences) -> np.ndarray:
    """|q'_i^T F q_i| for all pairs."""
    return np.abs(np.einsum("ni,ij,nj->n", corrs.q_prime, F, corrs.q))


def denormalize_fundamental(F_normalized: np.ndarray, S: np.ndarray) -> np.ndarray:
    """Fundamental matrix in the original coordinates, S^T F S, normalized."""
    return normalize_fundamental(S.T @ F_normalized @ S)


def denormalize_calibration(K_normalized: np.ndarray, S: np.ndarray) -> np.ndarray:
    """Calibration matrix in the original coordinates, S^-1 K."""
    return np.linalg.solve(S, K_normalized)


def fundamental_from_pose(K: np.ndarray, R: np.ndarray, t: np.ndarray) -> np.ndarray:
    """F = K^-T [t]x R K^-1 for x2 = R x1 + t, normalized."""
    K_inv = np.linalg.inv(K)
    return normalize_fundamental(K_inv.T @ skew(t) @ R @ K_inv)
