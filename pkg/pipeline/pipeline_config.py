from dataclasses import dataclass


@dataclass
class FilterConfig:
    """
    Acceptance filters applied to each image pair.

    Attributes:
        min_angle_deg (float): Pairs with a smaller rotation angle are rejected.
        pp_window_px (float): Half-width of the principal point window.
        center (tuple[float, float] | None): Window centre. None disables the window.
        epipolar_threshold (float): Largest accepted median |q'^T F q| on
            normalized points with a unit-norm F.
        trace_tolerance (float): Largest accepted |tr R - tau|.
    """

    min_angle_deg: float = 5.0
    pp_window_px: float = 50.0
    center: tuple[float, float] | None = None
    epipolar_threshold: float = 1e-2
    trace_tolerance: float = 0.05

    def __post_init__(self):
        if self.center is not None:
            self.center = (float(self.center[0]), float(self.center[1]))
        if self.min_angle_deg < 0 or self.pp_window_px <= 0:
            raise ValueError("min_angle_deg must be non-negative and pp_window_px positive.")
        if self.epipolar_threshold <= 0 or self.trace_tolerance <= 0:
            raise ValueError("Residual thresholds must be positive.")
