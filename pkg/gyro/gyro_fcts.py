from dataclasses import dataclass

import numpy as np
from scipy.linalg import polar
from scipy.spatial.transform import Rotation

from geometry import skew
from utils import SelfCalibrationError

REORTHONORMALIZE_EVERY = 256


class GyroDataError(SelfCalibrationError):
    """
    Raised for gyroscope sequences that cannot be integrated
    (non-monotonic timestamps, empty windows, malformed rates).
    """

    pass


@dataclass
class GyroSamples:
    """
    A gyroscope stream. The rate omega[i] is held over (timestamps[i-1], timestamps[i]].

    Attributes:
        timestamps (np.ndarray): (n,) seconds, strictly increasing.
        omega (np.ndarray): (n, 3) angular rates in rad/s.
    """

    timestamps: np.ndarray
    omega: np.ndarray

    def __post_init__(self):
        self.timestamps = np.asarray(self.timestamps, dtype=float).reshape(-1)
        self.omega = np.asarray(self.omega, dtype=float).reshape(-1, 3)
        if len(self.timestamps) != len(self.omega):
            raise GyroDataError(
                f"Got {len(self.timestamps)} timestamps but {len(self.omega)} rate samples."
            )
        if not np.all(np.isfinite(self.timestamps)) or not np.all(np.isfinite(self.omega)):
            raise GyroDataError("Gyroscope samples contain non-finite values.")
        if np.any(np.diff(self.timestamps) <= 0):
            raise GyroDataError("Gyroscope timestamps are not strictly increasing.")

    def __len__(self) -> int:
        return len(self.timestamps)

    def window(self, t_start: float, t_end: float) -> "GyroSamples":
        """Samples with t_start < timestamp <= t_end."""
        if t_end <= t_start:
            raise GyroDataError(f"Empty time window ({t_start}, {t_end}].")
        mask = (self.timestamps > t_start) & (self.timestamps <= t_end)
        if not np.any(mask):
            raise GyroDataError(f"No gyroscope samples in the window ({t_start}, {t_end}].")
        return GyroSamples(self.timestamps[mask], self.omega[mask])


@dataclass
class RotationEstimate:
    """
    Integrated rotation with its angle and trace.

    Attributes:
        R (np.ndarray): 3x3 rotation.
        theta (float): Rotation angle in radians, in [0, pi].
        tau (float): 2 cos(theta) + 1.
    """

    R: np.ndarray
    theta: float
    tau: float

    @classmethod
    def from_rotation(cls, R: np.ndarray) -> "RotationEstimate":
        theta = rotation_angle(R)
        return cls(R=R, theta=theta, tau=tau_from_angle(theta))

    @property
    def theta_deg(self) -> float:
        return float(np.degrees(self.theta))


def tau_from_angle(theta: float) -> float:
    """Trace of a rotation by theta radians."""
    return float(2.0 * np.cos(theta) + 1.0)


def angle_from_tau(tau: float) -> float:
    """Rotation angle in [0, pi] for a trace tau, clamped to [-1, 3]."""
    return float(np.arccos(np.clip((tau - 1.0) / 2.0, -1.0, 1.0)))


def rotation_angle(R: np.ndarray) -> float:
    return angle_from_tau(float(np.trace(R)))


def rodrigues_exp(v: np.ndarray) -> np.ndarray:
    """
    exp([v]x) by the Rodrigues formula: the rotation by |v| radians about v/|v|.

    Args:
        v (np.ndarray): Rotation vector of shape (3,).

    Returns:
        np.ndarray: 3x3 rotation matrix.
    """
    v = np.asarray(v, dtype=float)
    theta = np.linalg.norm(v)
    V = skew(v)
    if theta < 1e-8:
        # second-order Taylor expansion
        return np.eye(3) + V + 0.5 * (V @ V)
    A = np.sin(theta) / theta
    B = (1.0 - np.cos(theta)) / theta**2
    return np.eye(3) + A * V + B * (V @ V)


def reorthonormalize(R: np.ndarray) -> np.ndarray:
    """Nearest rotation matrix (orthogonal polar factor)."""
    U, _ = polar(R)
    return U


def integrate(
    samples: GyroSamples,
    t_reference: float | None = None,
    R0: np.ndarray | None = None,
) -> RotationEstimate:
    """
    Integrate angular rates by the recursion R_i = exp([w_i]x dxi_i) R_{i-1}
    with dxi_i = xi_i - xi_{i-1} (zero-order hold).

    Args:
        samples (GyroSamples): The stream.
        t_reference (float, optional): xi_0. Defaults to the first timestamp,
            in which case the first sample contributes no increment.
        R0 (np.ndarray, optional): Initial rotation, identity by default.

    Returns:
        RotationEstimate: The final rotation, its angle and trace.

    Raises:
        GyroDataError: If t_reference is not before the first timestamp.
    """
    R = np.eye(3) if R0 is None else np.array(R0, dtype=float)
    if len(samples) == 0:
        return RotationEstimate.from_rotation(R)

    timestamps = samples.timestamps
    if t_reference is None:
        t_reference = timestamps[0]
    if t_reference > timestamps[0]:
        raise GyroDataError(
            f"Reference time {t_reference} lies after the first sample at {timestamps[0]}."
        )
    increments = np.diff(np.concatenate([[t_reference], timestamps]))

    for i, (omega, dxi) in enumerate(zip(samples.omega, increments), start=1):
        R = rodrigues_exp(omega * dxi) @ R
        if i % REORTHONORMALIZE_EVERY == 0:
            R = reorthonormalize(R)
    R = reorthonormalize(R)
    return RotationEstimate.from_rotation(R)


def synthesize_gyro_samples(
    R: np.ndarray, duration: float, rate_hz: float, t_start: float = 0.0
) -> GyroSamples:
    """
    A constant-rate stream whose integral from t_start over duration is R.

    Args:
        R (np.ndarray): Target rotation.
        duration (float): Length of the stream in seconds.
        rate_hz (float): Sampling rate.
        t_start (float): Reference time of the stream.

    Returns:
        GyroSamples: Samples at t_start, t_start + 1/rate_hz, ..., t_start + duration.
        The first one only marks the reference time.
    """
    if duration <= 0 or rate_hz <= 0:
        raise ValueError("Duration and rate must be positive.")
    n_samples = max(1, int(round(duration * rate_hz)))
    timestamps = t_start + duration * np.arange(n_samples + 1) / n_samples
    omega = Rotation.from_matrix(R).as_rotvec() / duration
    return GyroSamples(timestamps, np.tile(omega, (n_samples + 1, 1)))
