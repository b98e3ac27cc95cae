from dataclasses import dataclass

import numpy as np

from utils import SelfCalibrationError

W = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])


class CheiralityError(SelfCalibrationError):
    """
    Raised when none of the four (R, t) candidates puts a majority of the
    triangulated points in front of both cameras.
    """

    pass


@dataclass
class RelativePose:
    """
    Relative pose x2 = R x1 + t between two calibrated cameras.

    Attributes:
        R (np.ndarray): 3x3 rotation.
        t (np.ndarray): Unit translation.
        n_in_front (int): Points with positive depth in both views.
        trace_deviation (float): |tr R - tau| for the supplied tau.
        trace_consistent (bool): Whether the deviation is within tolerance.
    """

    R: np.ndarray
    t: np.ndarray
    n_in_front: int = 0
    trace_deviation: float = 0.0
    trace_consistent: bool = True

    @property
    def tau(self) -> float:
        return float(np.trace(self.R))


def _frobenius_normalized(E: np.ndarray) -> np.ndarray:
    E = np.asarray(E, dtype=float)
    norm = np.linalg.norm(E)
    if norm == 0.0:
        raise ValueError("The essential matrix is zero.")
    return E / norm


def essential_from_f(F: np.ndarray, K: np.ndarray) -> np.ndarray:
    """
    Essential matrix K^T F K of a camera pair sharing the calibration K.

    Args:
        F (np.ndarray): Fundamental matrix.
        K (np.ndarray): Calibration matrix.

    Returns:
        np.ndarray: E with unit Frobenius norm.

    Raises:
        ValueError: If K is singular.
    """
    K = np.asarray(K, dtype=float)
    if np.linalg.cond(K) > 1e12:
        raise ValueError("The calibration matrix is singular.")
    return _frobenius_normalized(K.T @ F @ K)


def essential_residual(E: np.ndarray) -> float:
    """Frobenius norm of 1/2 tr(E E^T) E - E E^T E for the normalized E."""
    E = _frobenius_normalized(E)
    EEt = E @ E.T
    return float(np.linalg.norm(0.5 * np.trace(EEt) * E - EEt @ E))


def _trace_invariants(E: np.ndarray) -> tuple[float, float, float]:
    E = _frobenius_normalized(E)
    return float(np.trace(E @ E.T)), float(np.trace(E @ E)), float(np.trace(E))


def trace_constraint_residual(E: np.ndarray, tau: float) -> float:
    """|1/2 (tau^2 - 1) tr(E E^T) + (tau + 1) tr(E^2) - tau tr^2(E)| for the normalized E."""
    T, Q, S = _trace_invariants(E)
    return abs(0.5 * (tau**2 - 1.0) * T + (tau + 1.0) * Q - tau * S**2)


def trace_quadratic_roots(E: np.ndarray) -> np.ndarray:
    """
    The two values of tau for which the trace constraint holds for a fixed E.
    For an essential matrix they are the traces of its twisted pair.

    Returns:
        np.ndarray: The roots sorted ascending, complex if E is not essential.
    """
    T, Q, S = _trace_invariants(E)
    roots = np.roots([0.5 * T, Q - S**2, Q - 0.5 * T])
    if np.all(np.abs(roots.imag) <= 1e-9):
        roots = roots.real
    return np.sort(roots)


def twisted_pair(E: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    The two rotations compatible with E and the translation direction.

    Args:
        E (np.ndarray): Essential matrix (any scale and sign).

    Returns:
        tuple: (R_a, R_b, t), t of unit norm and defined up to sign.
    """
    U, _, Vt = np.linalg.svd(E)
    if np.linalg.det(U) < 0:
        U = -U
    if np.linalg.det(Vt) < 0:
        Vt = -Vt
    return U @ W @ Vt, U @ W.T @ Vt, U[:, 2]


def triangulate_midpoint(
    R: np.ndarray, t: np.ndarray, x1: np.ndarray, x2: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Midpoint triangulation of calibrated rays for x2 = R x1 + t.

    Args:
        R (np.ndarray): Rotation.
        t (np.ndarray): Translation.
        x1 (np.ndarray): (N, 2) or (N, 3) calibrated points of the first view.
        x2 (np.ndarray): Same for the second view.

    Returns:
        tuple: (X, depth1, depth2): (N, 3) points in the first camera frame and
        their depths in both views. Parallel rays get depth 0.
    """
    d1 = _homogeneous(x1)
    d2 = _homogeneous(x2) @ R  # R^T x2, rays of view 2 in the frame of view 1
    c2 = -R.T @ t

    a11 = np.einsum("ni,ni->n", d1, d1)
    a12 = np.einsum("ni,ni->n", d1, d2)
    a22 = np.einsum("ni,ni->n", d2, d2)
    r1 = d1 @ c2
    r2 = d2 @ c2
    # lambda1 d1 - lambda2 d2 = c2 in the least-squares sense
    det = a12 * a12 - a11 * a22
    valid = np.abs(det) > 1e-12 * a11 * a22
    safe_det = np.where(valid, det, 1.0)
    lambda1 = np.where(valid, (a12 * r2 - a22 * r1) / safe_det, 0.0)
    lambda2 = np.where(valid, (a11 * r2 - a12 * r1) / safe_det, 0.0)

    X = 0.5 * (lambda1[:, None] * d1 + c2 + lambda2[:, None] * d2)
    X = np.where(valid[:, None], X, 0.0)
    depth1 = X[:, 2]
    depth2 = (X @ R.T + t)[:, 2]
    return X, depth1, depth2


def _homogeneous(x: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] == 2:
        x = np.column_stack([x, np.ones(len(x))])
    return x


def decompose_essential(
    E: np.ndarray,
    x1: np.ndarray,
    x2: np.ndarray,
    tau: float,
    trace_tolerance: float = 0.05,
) -> RelativePose:
    """
    Recover (R, t) from E by cheirality: among the four candidates
    {R_a, R_b} x {t, -t} keep the one with the most points in front of both
    cameras, then compare tr R with the known rotation trace.

    Args:
        E (np.ndarray): Essential matrix.
        x1 (np.ndarray): Calibrated points of the first view, K^-1 q.
        x2 (np.ndarray): Calibrated points of the second view.
        tau (float): The known rotation trace.
        trace_tolerance (float): Allowed |tr R - tau|.

    Returns:
        RelativePose: The selected pose with its trace status.

    Raises:
        CheiralityError: If no candidate has a majority of points in front.
    """
    R_a, R_b, u = twisted_pair(E)
    n_points = np.atleast_2d(x1).shape[0]

    best = None
    for R in (R_a, R_b):
        for t in (u, -u):
            _, depth1, depth2 = triangulate_midpoint(R, t, x1, x2)
            n_in_front = int(np.sum((depth1 > 0) & (depth2 > 0)))
            if best is None or n_in_front > best[2]:
                best = (R, t, n_in_front)

    R, t, n_in_front = best
    if 2 * n_in_front <= n_points:
        raise CheiralityError(
            f"Best pose candidate has only {n_in_front} of {n_points} points in front of both cameras."
        )
    deviation = abs(float(np.trace(R)) - tau)
    return RelativePose(
        R=R,
        t=t / np.linalg.norm(t),
        n_in_front=n_in_front,
        trace_deviation=deviation,
        trace_consistent=deviation <= trace_tolerance,
    )


def rotation_error_deg(R_true: np.ndarray, R_est: np.ndarray) -> float:
    """Angle of R_true^T R_est in degrees."""
    cos_angle = (np.trace(R_true.T @ R_est) - 1.0) / 2.0
    return float(np.degrees(np.arccos(np.clip(cos_angle, -1.0, 1.0))))


def translation_error_deg(t_true: np.ndarray, t_est: np.ndarray) -> float:
    """Angle between two translation directions in degrees."""
    cos_angle = np.dot(t_true, t_est) / (np.linalg.norm(t_true) * np.linalg.norm(t_est))
    return float(np.degrees(np.arccos(np.clip(cos_angle, -1.0, 1.0))))
