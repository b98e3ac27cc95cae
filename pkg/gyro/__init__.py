from .gyro_fcts import (
    GyroDataError,
    GyroSamples,
    RotationEstimate,
    angle_from_tau,
    integrate,
    reorthonormalize,
    rodrigues_exp,
    rotation_angle,
    synthesize_gyro_samples,
    tau_from_angle,
)

__all__ = [
    "GyroDataError",
    "GyroSamples",
    "RotationEstimate",
    "angle_from_tau",
    "integrate",
    "reorthonormalize",
    "rodrigues_exp",
    "rotation_angle",
    "synthesize_gyro_samples",
    "tau_from_angle",
]
