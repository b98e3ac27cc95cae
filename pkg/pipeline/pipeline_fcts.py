import time
from dataclasses import dataclass, field

import numpy as np

from geometry import (
    CheiralityError,
    Correspondences,
    DegenerateConfigurationError,
    RelativePose,
    decompose_essential,
    denormalize_calibration,
    denormalize_fundamental,
    epipolar_residuals,
    essential_from_f,
    estimate_fundamental,
    normalize,
)
from gyro import angle_from_tau
from solver import CalibrationSolution, DegenerateInstanceError, SolverConfig, solve_calibration

from .pipeline_config import FilterConfig

ACCEPTED = "accepted"
REJECTED_ANGLE = "rejected: angle below threshold"
REJECTED_DEGENERATE = "rejected: degenerate configuration"
REJECTED_NO_SOLUTION = "rejected: no feasible solution"
REJECTED_WINDOW = "rejected: principal point outside window"
REJECTED_RESIDUAL = "rejected: epipolar residual above threshold"
REJECTED_CHEIRALITY = "rejected: cheirality"
REJECTED_TRACE = "rejected: trace mismatch"


@dataclass
class Candidate:
    """
    One feasible calibration of a pair, in pixel coordinates.

    Attributes:
        K (np.ndarray): Denormalized calibration matrix S^-1 K.
        F (np.ndarray): Denormalized fundamental matrix S^T F S.
        F_normalized (np.ndarray): The fundamental matrix the solver ran on.
        solution (CalibrationSolution): The solver output in normalized units.
    """

    K: np.ndarray
    F: np.ndarray
    F_normalized: np.ndarray
    solution: CalibrationSolution = field(repr=False)

    @property
    def principal_point(self) -> tuple[float, float]:
        return float(self.K[0, 2]), float(self.K[1, 2])

    @property
    def focal_length(self) -> float:
        return float(self.K[0, 0])


@dataclass
class PairSolution:
    """
    Everything the solver stage produces for one pair.

    Attributes:
        S (np.ndarray): Normalization transform.
        fundamentals (list[np.ndarray]): Fundamental matrices on normalized points.
        candidates (list[Candidate]): Feasible calibrations pooled over all F.
        n_real (int): Real roots pooled over all F.
        n_solver_failures (int): F roots the solver rejected as degenerate.
        runtime (float): Seconds spent in the calibration solver.
    """

    S: np.ndarray
    fundamentals: list[np.ndarray]
    candidates: list[Candidate]
    n_real: int = 0
    n_solver_failures: int = 0
    runtime: float = 0.0

    @property
    def n_feasible(self) -> int:
        return len(self.candidates)


@dataclass
class PairResult:
    """
    Calibration report of one image pair.

    Attributes:
        status (str): "accepted" or the reason of the rejection.
        tau (float): Rotation trace used.
        theta_deg (float): Rotation angle used.
        K (np.ndarray | None): Selected calibration.
        pose (RelativePose | None): Relative pose under the selected calibration.
        candidates (list[np.ndarray]): Every feasible K before the window filter.
        epipolar_residual (float): Median |q'^T F q| on normalized points.
        n_real (int): Real roots of the solver.
        n_feasible (int): Feasible roots of the solver.
        label (str): Name of the pair, e.g. the matches file.
    """

    status: str
    tau: float
    theta_deg: float
    K: np.ndarray | None = None
    pose: RelativePose | None = None
    candidates: list[np.ndarray] = field(default_factory=list)
    epipolar_residual: float = float("nan")
    n_real: int = 0
    n_feasible: int = 0
    label: str = ""

    @property
    def accepted(self) -> bool:
        return self.status == ACCEPTED

    def to_dict(self) -> dict:
        report = {
            "label": self.label,
            "status": self.status,
            "tau": self.tau,
            "theta_deg": self.theta_deg,
            "n_real": self.n_real,
            "n_feasible": self.n_feasible,
            "epipolar_residual": self.epipolar_residual,
            "candidates": [K.tolist() for K in self.candidates],
            "K": None if self.K is None else self.K.tolist(),
        }
        if self.pose is not None:
            report.update(
                {
                    "R": self.pose.R.tolist(),
                    "t": self.pose.t.tolist(),
                    "trace_R": self.pose.tau,
                    "trace_deviation": self.pose.trace_deviation,
                    "n_in_front": self.pose.n_in_front,
                }
            )
        return report


@dataclass
class CalibrationReport:
    """
    Per-pair results and the calibration averaged over the accepted pairs.
    """

    pairs: list[PairResult]

    @property
    def accepted(self) -> list[PairResult]:
        return [pair for pair in self.pairs if pair.accepted]

    @property
    def K_mean(self) -> np.ndarray | None:
        return aggregate_calibration(self.pairs)

    def to_dict(self) -> dict:
        K_mean = self.K_mean
        return {
            "pairs": [pair.to_dict() for pair in self.pairs],
            "n_pairs": len(self.pairs),
            "n_accepted": len(self.accepted),
            "K_mean": None if K_mean is None else K_mean.tolist(),
        }


def solve_pair(
    corrs: Correspondences, tau: float, solver_config: SolverConfig | None = None
) -> PairSolution:
    """
    Normalize, estimate F (all 7-point roots when N = 7), run the calibration
    solver on every F and map the feasible solutions back to pixels.

    Args:
        corrs (Correspondences): Pixel correspondences, N >= 7.
        tau (float): Rotation trace.
        solver_config (SolverConfig, optional): Solver tolerances.

    Returns:
        PairSolution: Pooled feasible calibrations, sorted by descending p per F.

    Raises:
        DegenerateConfigurationError: If the points do not determine F.
    """
    S, normalized = normalize(corrs)
    fundamentals = estimate_fundamental(normalized)

    candidates = []
    n_real = 0
    n_failures = 0
    runtime = 0.0
    for F_n in fundamentals:
        start = time.perf_counter()
        try:
            output = solve_calibration(F_n, tau, solver_config)
        except DegenerateInstanceError:
            n_failures += 1
            continue
        finally:
            runtime += time.perf_counter() - start
        n_real += output.n_real
        F = denormalize_fundamental(F_n, S)
        for solution in output.solutions:
            candidates.append(
                Candidate(
                    K=denormalize_calibration(solution.K, S),
                    F=F,
                    F_normalized=F_n,
                    solution=solution,
                )
            )
    return PairSolution(
        S=S,
        fundamentals=fundamentals,
        candidates=candidates,
        n_real=n_real,
        n_solver_failures=n_failures,
        runtime=runtime,
    )


def in_window(K: np.ndarray, center: tuple[float, float], half_width: float) -> bool:
    return abs(K[0, 2] - center[0]) < half_width and abs(K[1, 2] - center[1]) < half_width


def select_candidate(
    candidates: list[Candidate], center: tuple[float, float] | None
) -> Candidate:
    """The candidate whose principal point is closest to the centre, or the first one without a centre."""
    if center is None:
        return candidates[0]
    distances = [np.hypot(c.K[0, 2] - center[0], c.K[1, 2] - center[1]) for c in candidates]
    return candidates[int(np.argmin(distances))]


def calibrated_points(K: np.ndarray, corrs: Correspondences) -> tuple[np.ndarray, np.ndarray]:
    """K^-1 q for both views, as (N, 3) rays."""
    K_inv = np.linalg.inv(K)
    return corrs.q @ K_inv.T, corrs.q_prime @ K_inv.T


def recover_pose(
    candidate: Candidate, corrs: Correspondences, tau: float, trace_tolerance: float = 0.05
) -> RelativePose:
    """Relative pose of a pair under a candidate calibration."""
    E = essential_from_f(candidate.F, candidate.K)
    x1, x2 = calibrated_points(candidate.K, corrs)
    return decompose_essential(E, x1, x2, tau, trace_tolerance)


def calibrate_pair(
    corrs: Correspondences,
    tau: float,
    filter_config: FilterConfig | None = None,
    solver_config: SolverConfig | None = None,
    label: str = "",
) -> PairResult:
    """
    Full calibration of one pair with the acceptance filters: minimum
    rotation angle, principal point window, epipolar residual, cheirality and
    rotation trace consistency.

    Args:
        corrs (Correspondences): Pixel correspondences.
        tau (float): Rotation trace, e.g. from gyro integration.
        filter_config (FilterConfig, optional): Filter thresholds.
        solver_config (SolverConfig, optional): Solver tolerances.
        label (str): Name of the pair in the report.

    Returns:
        PairResult: The report. Rejections are reported in the status, never raised.
    """
    filter_config = filter_config or FilterConfig()
    theta_deg = float(np.degrees(angle_from_tau(tau)))
    result = PairResult(status=ACCEPTED, tau=tau, theta_deg=theta_deg, label=label)

    if theta_deg < filter_config.min_angle_deg:
        result.status = REJECTED_ANGLE
        return result

    try:
        pair = solve_pair(corrs, tau, solver_config)
    except DegenerateConfigurationError:
        result.status = REJECTED_DEGENERATE
        return result

    result.n_real = pair.n_real
    result.n_feasible = pair.n_feasible
    result.candidates = [c.K for c in pair.candidates]
    if not pair.candidates:
        result.status = REJECTED_NO_SOLUTION
        return result

    candidates = pair.candidates
    center = filter_config.center
    if center is not None:
        candidates = [c for c in candidates if in_window(c.K, center, filter_config.pp_window_px)]
        if not candidates:
            result.status = REJECTED_WINDOW
            return result

    chosen = select_candidate(candidates, center)
    result.K = chosen.K
    _, normalized = normalize(corrs)
    result.epipolar_residual = float(np.median(epipolar_residuals(chosen.F_normalized, normalized)))
    if result.epipolar_residual > filter_config.epipolar_threshold:
        result.status = REJECTED_RESIDUAL
        return result

    try:
        result.pose = recover_pose(chosen, corrs, tau, filter_config.trace_tolerance)
    except CheiralityError:
        result.status = REJECTED_CHEIRALITY
        return result
    if not result.pose.trace_consistent:
        result.status = REJECTED_TRACE
    return result


def aggregate_calibration(results: list[PairResult]) -> np.ndarray | None:
    """Element-wise mean of K over the accepted pairs, None if no pair was accepted."""
    accepted = [r.K for r in results if r.accepted]
    if not accepted:
        return None
    return np.mean(accepted, axis=0)


def calibrate_pairs(
    pairs: list[tuple[str, Correspondences, float]],
    filter_config: FilterConfig | None = None,
    solver_config: SolverConfig | None = None,
) -> CalibrationReport:
    """Calibrate (label, correspondences, tau) triples and aggregate the accepted ones."""
    results = [
        calibrate_pair(corrs, tau, filter_config, solver_config, label=label)
        for label, corrs, tau in pairs
    ]
    return CalibrationReport(pairs=results)
