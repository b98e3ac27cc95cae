from .utils import (
    SelfCalibrationError,
    read_yaml_config,
    create_results_dir,
    set_random_seeds,
    trial_rng,
    nice_print,
    make_description,
    get_progress_bar,
    run_tasks,
)

__all__ = [
    "SelfCalibrationError",
    "read_yaml_config",
    "create_results_dir",
    "set_random_seeds",
    "trial_rng",
    "nice_print",
    "make_description",
    "get_progress_bar",
    "run_tasks",
]
