import os
from contextlib import redirect_stdout
from dataclasses import dataclass, replace
from typing import Any

import numpy as np
from tabulate import tabulate

from data import NoiseConfig, SceneConfig, add_noise, generate_scene, save_trials_hdf5
from geometry import CheiralityError, rotation_error_deg, translation_error_deg
from gyro import tau_from_angle
from pipeline import recover_pose, solve_pair
from solver import SolverConfig
from utils import (
    SelfCalibrationError,
    create_results_dir,
    make_description,
    nice_print,
    run_tasks,
    trial_rng,
)

from .bench_plots import (
    plot_error_histogram,
    plot_solution_counts,
    plot_sweep,
)
from .bench_utils import (
    count_histogram,
    format_time,
    nanmedian,
    relative_K_error,
    trial_row,
    trials_to_arrays,
    write_metrics_to_yaml,
    write_summary_json,
    write_trials_csv,
)

OK = "ok"


@dataclass
class TrialResult:
    """
    Outcome of one synthetic trial.

    Attributes:
        trial_index (int): Index of the trial within its study level.
        status (str): "ok" or the reason the trial produced no estimate.
        relative_K_error (float): Smallest ||K - K_gt|| / ||K_gt|| over the feasible solutions.
        relative_f_error (float): |f - f_gt| / f_gt of that solution.
        n_real_solutions (int): Real roots of the solver (any sign of p).
        n_feasible_solutions (int): Real roots with p > 0.
        rotation_error_deg (float): Angle of R_gt^T R.
        translation_error_deg (float): Angle between t_gt and t.
        runtime (float): Seconds spent in the calibration solver.
        K_estimate (np.ndarray | None): The solution closest to the ground truth.
    """

    trial_index: int
    status: str = OK
    relative_K_error: float = float("nan")
    relative_f_error: float = float("nan")
    n_real_solutions: int = 0
    n_feasible_solutions: int = 0
    rotation_error_deg: float = float("nan")
    translation_error_deg: float = float("nan")
    runtime: float = 0.0
    K_estimate: np.ndarray | None = None


def run_trial(
    scene_cfg: SceneConfig,
    noise_cfg: NoiseConfig,
    seed: int,
    trial_index: int,
    solver_config: SolverConfig | None = None,
) -> TrialResult:
    """
    Generate a scene, add noise and run the full pipeline
    (normalize, F, calibration solver, denormalize, pose).

    Args:
        scene_cfg (SceneConfig): Scene parameters.
        noise_cfg (NoiseConfig): Noise levels.
        seed (int): Benchmark seed.
        trial_index (int): Trial index; (seed, trial_index) fixes the random stream.
        solver_config (SolverConfig, optional): Solver tolerances.

    Returns:
        TrialResult: Errors and solution counts. Failures are recorded in the status.
    """
    rng = trial_rng(seed, trial_index)
    result = TrialResult(trial_index=trial_index)
    try:
        scene = generate_scene(scene_cfg, rng)
        corrs, theta = add_noise(scene.corrs, noise_cfg, scene.theta, rng)
        tau = tau_from_angle(theta)
        pair = solve_pair(corrs, tau, solver_config)
    except SelfCalibrationError as err:
        result.status = f"failed: {type(err).__name__}"
        return result

    result.n_real_solutions = pair.n_real
    result.n_feasible_solutions = pair.n_feasible
    result.runtime = pair.runtime
    if not pair.candidates:
        result.status = "no feasible solution"
        return result

    errors = [relative_K_error(c.K, scene.K) for c in pair.candidates]
    best = pair.candidates[int(np.argmin(errors))]
    f_gt = scene.K[0, 0]
    result.relative_K_error = min(errors)
    result.relative_f_error = abs(best.focal_length - f_gt) / f_gt
    result.K_estimate = best.K

    try:
        pose = recover_pose(best, corrs, tau, trace_tolerance=np.inf)
    except (CheiralityError, ValueError):
        result.status = "cheirality failure"
        return result
    result.rotation_error_deg = rotation_error_deg(scene.R, pose.R)
    result.translation_error_deg = translation_error_deg(scene.t, pose.t)
    return result


def summarize_trials(trials: list[TrialResult]) -> dict[str, Any]:
    """
    Medians and solution-count histograms of a set of trials. Timing is kept
    under "runtime" and is not part of the deterministic summary.

    Args:
        trials (list[TrialResult]): The trials.

    Returns:
        dict: The summary.
    """
    n_feasible = [t.n_feasible_solutions for t in trials]
    runtimes = np.array([t.runtime for t in trials if t.runtime > 0])
    return {
        "n_trials": len(trials),
        "n_failed": sum(t.status != OK for t in trials),
        "median_rel_K_error": nanmedian([t.relative_K_error for t in trials]),
        "median_rel_f_error": nanmedian([t.relative_f_error for t in trials]),
        "median_rotation_error_deg": nanmedian([t.rotation_error_deg for t in trials]),
        "median_translation_error_deg": nanmedian([t.translation_error_deg for t in trials]),
        "real_solutions_histogram": count_histogram([t.n_real_solutions for t in trials]),
        "feasible_solutions_histogram": count_histogram(n_feasible),
        "fraction_single_feasible": float(np.mean(np.asarray(n_feasible) == 1)) if trials else 0.0,
        "runtime": {
            "median": float(np.median(runtimes)) if runtimes.size else None,
            "mean": float(np.mean(runtimes)) if runtimes.size else None,
            "std": float(np.std(runtimes)) if runtimes.size else None,
        },
    }


def run_trials(
    scene_cfg: SceneConfig,
    noise_cfg: NoiseConfig,
    n_trials: int,
    seed: int,
    solver_config: SolverConfig | None = None,
    n_workers: int = 1,
    description: str = "",
    disable_progress: bool = False,
) -> tuple[list[TrialResult], dict[str, Any]]:
    """
    Run independent trials, optionally on a pool of worker threads. Results
    do not depend on the number of workers.

    Args:
        scene_cfg (SceneConfig): Scene parameters.
        noise_cfg (NoiseConfig): Noise levels.
        n_trials (int): Number of trials.
        seed (int): Benchmark seed.
        solver_config (SolverConfig, optional): Solver tolerances.
        n_workers (int): Number of worker threads.
        description (str): Progress bar description.
        disable_progress (bool): Whether to hide the progress bar.

    Returns:
        tuple[list[TrialResult], dict]: The trials and their summary.
    """
    tasks = [(scene_cfg, noise_cfg, seed, i, solver_config) for i in range(n_trials)]
    trials = run_tasks(
        run_trial,
        tasks,
        n_workers=n_workers,
        description=description,
        disable_progress=disable_progress,
    )
    return trials, summarize_trials(trials)


def study_levels(study: str, conf: dict) -> list:
    """The swept values of a study; the accuracy study has a single noise-free level."""
    if study == "accuracy":
        return [0.0]
    if study == "points":
        return list(conf["points"]["n_points"])
    return list(conf[study]["sigmas"])


def study_configs(
    study: str, level, scene_cfg: SceneConfig, conf: dict
) -> tuple[SceneConfig, NoiseConfig]:
    """Scene and noise configuration of one level of a study."""
    study_conf = conf.get(study, {})
    if study == "accuracy":
        return scene_cfg, NoiseConfig()
    if study == "image_noise":
        return scene_cfg, NoiseConfig(image_sigma=level)
    if study == "angle_noise":
        return scene_cfg, NoiseConfig(
            image_sigma=study_conf.get("image_sigma", 0.0), angle_sigma=level
        )
    if study == "points":
        return replace(scene_cfg, n_points=int(level)), NoiseConfig(
            image_sigma=study_conf.get("image_sigma", 1.0)
        )
    raise ValueError(f"Unknown study '{study}'.")


def run_study(study: str, conf: dict) -> dict[str, Any]:
    """
    Run all levels of a study with the same seed, so every level sees the same
    scenes and noise draws up to scaling.

    Args:
        study (str): "accuracy", "image_noise", "angle_noise" or "points".
        conf (dict): The benchmark configuration.

    Returns:
        dict: {"levels": {level: summary}, "trials": {level: list[TrialResult]}}.
    """
    scene_cfg = SceneConfig(**conf["scene"])
    solver_config = SolverConfig(**conf.get("solver", {}))
    n_trials = conf.get(study, {}).get("n_trials", conf["n_trials"])

    summaries = {}
    trials = {}
    for level in study_levels(study, conf):
        level_scene, noise_cfg = study_configs(study, level, scene_cfg, conf)
        description = make_description(
            study, f"{level:g}", str(level_scene.n_points), conf["benchmark_id"]
        )
        level_trials, summary = run_trials(
            level_scene,
            noise_cfg,
            n_trials,
            conf["seed"],
            solver_config,
            n_workers=conf.get("n_workers", 1),
            description=description,
            disable_progress=not conf.get("verbose", True),
        )
        summaries[level] = summary
        trials[level] = level_trials
    return {"levels": summaries, "trials": trials}


def run_benchmark(conf: dict, base_dir: str = ".") -> dict[str, Any]:
    """
    Run every enabled study and write the results: summary.json, trials.csv,
    metrics.yaml, metrics_table.txt and trials.hdf5 under
    results/<benchmark_id>/, plots under plots/<benchmark_id>/.

    Args:
        conf (dict): The benchmark configuration.
        base_dir (str): Directory containing the results and plots folders.

    Returns:
        dict: The metrics of every study.
    """
    metrics = {}
    for study in ("accuracy", "image_noise", "angle_noise", "points"):
        if not conf.get(study, {}).get("enabled", False):
            continue
        nice_print(f"Running {study} study")
        metrics[study] = run_study(study, conf)

    results_dir = create_results_dir(base_dir, "results", conf["benchmark_id"])
    write_results(metrics, conf, results_dir)
    write_metrics_to_yaml(conf, metrics, base_dir)

    if conf.get("plots", True):
        print("Making plots...")
        make_plots(metrics, conf, base_dir)

    tabular_summary(metrics, conf, results_dir)
    return metrics


def deterministic_summary(metrics: dict[str, Any]) -> dict[str, Any]:
    """Per-study level summaries without timing, keyed by the level as a string."""
    summary = {}
    for study, study_metrics in metrics.items():
        summary[study] = {
            f"{level:g}": {k: v for k, v in level_summary.items() if k != "runtime"}
            for level, level_summary in study_metrics["levels"].items()
        }
    return summary


def write_results(metrics: dict[str, Any], conf: dict, results_dir: str) -> None:
    """Write summary.json, trials.csv and trials.hdf5."""
    write_summary_json(os.path.join(results_dir, "summary.json"), deterministic_summary(metrics))

    rows = []
    arrays = {}
    for study, study_metrics in metrics.items():
        for level, trials in study_metrics["trials"].items():
            rows.extend(trial_row(t, study, level) for t in trials)
            for name, values in trials_to_arrays(trials).items():
                arrays[f"{study}/{level:g}/{name}"] = values
    write_trials_csv(os.path.join(results_dir, "trials.csv"), rows)
    save_trials_hdf5(
        os.path.join(results_dir, "trials.hdf5"),
        arrays,
        attrs={"benchmark_id": conf["benchmark_id"], "seed": conf["seed"]},
    )
    if conf.get("verbose", False):
        print(f"Results written to {results_dir}")


def make_plots(metrics: dict[str, Any], conf: dict, base_dir: str = ".") -> None:
    """Error histogram and solution counts of the accuracy study, one figure per sweep."""
    if "accuracy" in metrics:
        trials = metrics["accuracy"]["trials"][0.0]
        plot_error_histogram(
            [t.relative_K_error for t in trials], conf, base_dir=base_dir
        )
        plot_solution_counts(
            [t.n_real_solutions for t in trials],
            [t.n_feasible_solutions for t in trials],
            conf,
            base_dir=base_dir,
        )
    for study in ("image_noise", "angle_noise", "points"):
        if study in metrics:
            plot_sweep(study, metrics[study]["levels"], conf, base_dir=base_dir)


def _format_error(value: float | None) -> str:
    return "-" if value is None else f"{value:.2e}"


def tabular_summary(metrics: dict[str, Any], conf: dict, results_dir: str) -> str:
    """
    Print a table of the medians per study level and save it as metrics_table.txt.

    Args:
        metrics (dict): The benchmark metrics.
        conf (dict): The benchmark configuration.
        results_dir (str): Directory of the table file.

    Returns:
        str: The rendered table.
    """
    print("The results are in! Here is a summary of the benchmark metrics:\n")
    headers = [
        "Study",
        "Level",
        "Median rel. K error",
        "Median rel. f error",
        "Median R error (deg)",
        "Median t error (deg)",
        "1 feasible",
        "Failed",
        "Solver time",
    ]
    rows = []
    for study, study_metrics in metrics.items():
        for level, summary in study_metrics["levels"].items():
            runtime = summary["runtime"]
            rows.append(
                [
                    study,
                    f"{level:g}",
                    _format_error(summary["median_rel_K_error"]),
                    _format_error(summary["median_rel_f_error"]),
                    _format_error(summary["median_rotation_error_deg"]),
                    _format_error(summary["median_translation_error_deg"]),
                    f"{summary['fraction_single_feasible'] * 100:.1f} %",
                    f"{summary['n_failed']}/{summary['n_trials']}",
                    "-" if runtime["mean"] is None else format_time(runtime["mean"], runtime["std"]),
                ]
            )

    table = tabulate(rows, headers, tablefmt="simple_grid")
    print(table)
    print()

    txt_path = os.path.join(results_dir, "metrics_table.txt")
    with open(txt_path, "w", encoding="utf-8") as f:
        with redirect_stdout(f):
            print(table)
    return table
