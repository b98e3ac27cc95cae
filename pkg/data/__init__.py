from .data_utils import (
    DataFormatError,
    load_trials_hdf5,
    read_ground_truth,
    read_gyro_csv,
    read_matches,
    save_trials_hdf5,
    write_ground_truth,
    write_gyro_csv,
    write_matches,
)
from .synthetic import (
    NoiseConfig,
    Scene,
    SceneConfig,
    SceneGenerationError,
    add_noise,
    generate_scene,
    project,
    random_rotation,
)

__all__ = [
    "DataFormatError",
    "load_trials_hdf5",
    "read_ground_truth",
    "read_gyro_csv",
    "read_matches",
    "save_trials_hdf5",
    "write_ground_truth",
    "write_gyro_csv",
    "write_matches",
    "NoiseConfig",
    "Scene",
    "SceneConfig",
    "SceneGenerationError",
    "add_noise",
    "generate_scene",
    "project",
    "random_rotation",
]
