from dataclasses import dataclass, field

import numpy as np

from geometry import Correspondences, fundamental_from_pose
from gyro import rodrigues_exp
from utils import SelfCalibrationError


class SceneGenerationError(SelfCalibrationError):
    """
    Raised when a synthetic scene with enough points visible in both views
    cannot be generated within the retry budget.
    """

    pass


@dataclass
class SceneConfig:
    """
    Default synthetic setup: a box of points in front of the first camera,
    the second camera displaced by a short baseline and rotated.

    Attributes:
        distance_to_scene (float): Distance from camera 1 to the box centre.
        scene_depth (float): Depth extent of the box.
        baseline_length (float): Distance between the camera centres.
        image_width (int): Image width in pixels.
        image_height (int): Image height in pixels.
        n_points (int): Number of correspondences.
        focal_length (float): Ground-truth focal length in pixels.
        principal_point (tuple[float, float]): Ground-truth principal point.
        min_angle_deg (float): Smallest sampled rotation angle.
        max_angle_deg (float): Largest sampled rotation angle.
        max_retries (int): Pose resamplings before giving up.
    """

    distance_to_scene: float = 1.0
    scene_depth: float = 0.5
    baseline_length: float = 0.1
    image_width: int = 1280
    image_height: int = 720
    n_points: int = 20
    focal_length: float = 1000.0
    principal_point: tuple[float, float] = (640.0, 360.0)
    min_angle_deg: float = 5.0
    max_angle_deg: float = 30.0
    max_retries: int = 100

    def __post_init__(self):
        self.principal_point = tuple(float(c) for c in self.principal_point)
        lengths = {
            "distance_to_scene": self.distance_to_scene,
            "scene_depth": self.scene_depth,
            "baseline_length": self.baseline_length,
            "image_width": self.image_width,
            "image_height": self.image_height,
            "focal_length": self.focal_length,
        }
        for name, value in lengths.items():
            if value <= 0:
                raise ValueError(f"SceneConfig.{name} must be positive, got {value}.")
        if self.scene_depth >= 2 * self.distance_to_scene:
            raise ValueError("The scene box must lie entirely in front of the first camera.")
        if self.n_points < 7:
            raise ValueError(f"SceneConfig.n_points must be at least 7, got {self.n_points}.")
        if not 0 <= self.min_angle_deg <= self.max_angle_deg <= 180:
            raise ValueError("Rotation angle range must satisfy 0 <= min <= max <= 180 degrees.")

    @property
    def K_gt(self) -> np.ndarray:
        a, b = self.principal_point
        f = self.focal_length
        return np.array([[f, 0.0, a], [0.0, f, b], [0.0, 0.0, 1.0]])


@dataclass
class NoiseConfig:
    """
    Attributes:
        image_sigma (float): Std of the pixel noise added to both views.
        angle_sigma (float): Std of s in the multiplicative angle noise theta (1 + s).
    """

    image_sigma: float = 0.0
    angle_sigma: float = 0.0

    def __post_init__(self):
        if self.image_sigma < 0 or self.angle_sigma < 0:
            raise ValueError("Noise levels must be non-negative.")


@dataclass
class Scene:
    """
    A generated two-view scene. Poses follow x2 = R x1 + t with camera 1 at the origin.

    Attributes:
        points3d (np.ndarray): (N, 3) points in the frame of camera 1.
        K (np.ndarray): Shared calibration matrix.
        R (np.ndarray): Relative rotation.
        t (np.ndarray): Relative translation (length = baseline).
        corrs (Correspondences): Noise-free projections.
    """

    points3d: np.ndarray
    K: np.ndarray
    R: np.ndarray
    t: np.ndarray
    corrs: Correspondences = field(repr=False)

    @property
    def theta(self) -> float:
        return float(np.arccos(np.clip((np.trace(self.R) - 1.0) / 2.0, -1.0, 1.0)))

    @property
    def tau(self) -> float:
        return float(np.trace(self.R))

    @property
    def F(self) -> np.ndarray:
        return fundamental_from_pose(self.K, self.R, self.t)


def random_unit_vector(rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(3)
    return v / np.linalg.norm(v)


def random_rotation(rng: np.random.Generator, min_angle_deg: float, max_angle_deg: float) -> np.ndarray:
    """Rotation about a uniformly distributed axis by an angle uniform in the given range."""
    axis = random_unit_vector(rng)
    angle = np.radians(rng.uniform(min_angle_deg, max_angle_deg))
    return rodrigues_exp(angle * axis)


def project(K: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Pixel coordinates of (N, 3) points given in the camera frame."""
    x = X @ K.T
    return x[:, :2] / x[:, 2:3]


def _in_image(x: np.ndarray, depth: np.ndarray, cfg: SceneConfig) -> np.ndarray:
    return (
        (depth > 0)
        & (x[:, 0] >= 0)
        & (x[:, 0] <= cfg.image_width)
        & (x[:, 1] >= 0)
        & (x[:, 1] <= cfg.image_height)
    )


def _sample_box(cfg: SceneConfig, n: int, rng: np.random.Generator) -> np.ndarray:
    """Points in the box spanned by the image at the near plane, depth range around the scene distance."""
    z_near = cfg.distance_to_scene - cfg.scene_depth / 2
    z_far = cfg.distance_to_scene + cfg.scene_depth / 2
    a, b = cfg.principal_point
    f = cfg.focal_length
    x = rng.uniform(-a / f * z_near, (cfg.image_width - a) / f * z_near, n)
    y = rng.uniform(-b / f * z_near, (cfg.image_height - b) / f * z_near, n)
    z = rng.uniform(z_near, z_far, n)
    return np.column_stack([x, y, z])


def generate_scene(
    cfg: SceneConfig,
    rng: np.random.Generator | int | None = None,
    R: np.ndarray | None = None,
    camera2_center: np.ndarray | None = None,
) -> Scene:
    """
    Generate a synthetic two-view scene with all points visible in both images.

    Points are drawn uniformly in the box; points not visible in the second
    view are redrawn. If the pose leaves too little overlap, the pose is
    redrawn as well (unless it was given).

    Args:
        cfg (SceneConfig): Scene parameters.
        rng (np.random.Generator | int, optional): Generator or seed.
        R (np.ndarray, optional): Fixed relative rotation.
        camera2_center (np.ndarray, optional): Fixed centre of camera 2 in the frame of camera 1.

    Returns:
        Scene: Points, ground truth pose and calibration, and correspondences.

    Raises:
        SceneGenerationError: If no valid scene is found within the retry budget.
    """
    rng = np.random.default_rng(rng)
    K = cfg.K_gt
    batch = 10 * cfg.n_points

    for _ in range(cfg.max_retries):
        R_i = R if R is not None else random_rotation(rng, cfg.min_angle_deg, cfg.max_angle_deg)
        C2 = (
            np.asarray(camera2_center, dtype=float)
            if camera2_center is not None
            else cfg.baseline_length * random_unit_vector(rng)
        )
        t = -R_i @ C2

        points = np.empty((0, 3))
        for _ in range(cfg.max_retries):
            candidates = _sample_box(cfg, batch, rng)
            X2 = candidates @ R_i.T + t
            visible = _in_image(project(K, X2), X2[:, 2], cfg)
            points = np.vstack([points, candidates[visible]])
            if len(points) >= cfg.n_points:
                break
        if len(points) < cfg.n_points:
            if R is not None and camera2_center is not None:
                break
            continue

        points = points[: cfg.n_points]
        corrs = Correspondences(project(K, points), project(K, points @ R_i.T + t))
        return Scene(points3d=points, K=K, R=R_i, t=t, corrs=corrs)

    raise SceneGenerationError(
        f"Could not place {cfg.n_points} points visible in both views after {cfg.max_retries} attempts."
    )


def add_noise(
    corrs: Correspondences,
    noise: NoiseConfig,
    theta: float,
    rng: np.random.Generator,
) -> tuple[Correspondences, float]:
    """
    Add i.i.d. Gaussian pixel noise to both views and multiplicative noise
    theta (1 + s), s ~ N(0, angle_sigma), to the rotation angle.

    The same number of draws is taken for every noise level, so a sweep over
    levels with the same generator state uses common random numbers.

    Args:
        corrs (Correspondences): Clean correspondences.
        noise (NoiseConfig): Noise levels.
        theta (float): True rotation angle in radians.
        rng (np.random.Generator): Random generator.

    Returns:
        tuple[Correspondences, float]: Noisy correspondences and angle.
    """
    n = len(corrs)
    pixel_noise = rng.standard_normal((2, n, 2))
    s = rng.standard_normal()
    if noise.image_sigma > 0:
        corrs = Correspondences(
            corrs.x1 + noise.image_sigma * pixel_noise[0],
            corrs.x2 + noise.image_sigma * pixel_noise[1],
        )
    if noise.angle_sigma > 0:
        theta = theta * (1.0 + noise.angle_sigma * s)
    return corrs, theta
