import csv
import json
import math
import os
from copy import deepcopy
from dataclasses import asdict, fields

import numpy as np
import yaml

STUDIES = ("accuracy", "image_noise", "angle_noise", "points")

# per-trial columns written to trials.csv, in this order
TRIAL_COLUMNS = (
    "study",
    "level",
    "trial_index",
    "status",
    "relative_K_error",
    "relative_f_error",
    "n_real_solutions",
    "n_feasible_solutions",
    "rotation_error_deg",
    "translation_error_deg",
    "runtime",
)


def check_benchmark_config(conf: dict) -> None:
    """
    Check whether there are any configuration issues with the benchmark.

    Args:
        conf (dict): The configuration dictionary.

    Raises:
        ValueError: If a required key is missing or a value is out of range.
    """
    print("\nChecking benchmark configuration...")
    for key in ("benchmark_id", "seed", "n_trials", "scene"):
        if key not in conf:
            raise ValueError(f"Configuration must include '{key}'.")

    if not isinstance(conf["n_trials"], int) or conf["n_trials"] < 1:
        raise ValueError("'n_trials' must be a positive integer.")
    if conf.get("n_workers", 1) < 1:
        raise ValueError("'n_workers' must be at least 1.")

    if not any(conf.get(study, {}).get("enabled", False) for study in STUDIES):
        raise ValueError(f"At least one of {', '.join(STUDIES)} must be enabled.")

    for study, key in (("image_noise", "sigmas"), ("angle_noise", "sigmas"), ("points", "n_points")):
        study_conf = conf.get(study, {})
        if not study_conf.get("enabled", False):
            continue
        levels = study_conf.get(key)
        if not levels:
            raise ValueError(f"'{study}.{key}' must be a non-empty list.")
        if any(level < 0 for level in levels):
            raise ValueError(f"'{study}.{key}' must not contain negative values.")
        if study == "points" and min(levels) < 7:
            raise ValueError("'points.n_points' values must be at least 7.")
        if sorted(levels) != list(levels):
            raise ValueError(f"'{study}.{key}' must be sorted in ascending order.")

    print("Configuration check passed successfully.")


def relative_K_error(K: np.ndarray, K_gt: np.ndarray) -> float:
    """||K - K_gt|| / ||K_gt|| in the Frobenius norm."""
    return float(np.linalg.norm(K - K_gt) / np.linalg.norm(K_gt))


def nanmedian(values) -> float | None:
    """Median over the finite values, None if there are none."""
    values = np.asarray(values, dtype=float)
    values = values[np.isfinite(values)]
    if values.size == 0:
        return None
    return float(np.median(values))


def count_histogram(counts, max_count: int = 6) -> dict[int, int]:
    """Occurrences of each count 0..max_count; larger counts are added to max_count."""
    counts = np.minimum(np.asarray(counts, dtype=int), max_count)
    return {k: int(np.sum(counts == k)) for k in range(max_count + 1)}


def convert_to_standard_types(data):
    """
    Recursively convert data to standard types that can be serialized to YAML
    or JSON. NaN becomes None.

    Args:
        data: The data to convert.

    Returns:
        The converted data.
    """
    if isinstance(data, np.ndarray):
        return convert_to_standard_types(data.tolist())
    elif isinstance(data, np.generic):
        return convert_to_standard_types(data.item())
    elif isinstance(data, dict):
        return {
            (k.item() if isinstance(k, np.generic) else k): convert_to_standard_types(v)
            for k, v in data.items()
        }
    elif isinstance(data, (list, tuple)):
        return [convert_to_standard_types(i) for i in data]
    elif isinstance(data, float):
        return None if math.isnan(data) else data
    elif isinstance(data, (int, str, bool, type(None))):
        return data
    else:
        return str(data)


def clean_metrics(metrics: dict) -> dict:
    """
    Remove per-trial entries and timing from the metrics so the remainder is
    a deterministic summary.

    Args:
        metrics (dict): The benchmark metrics, one entry per study.

    Returns:
        dict: The cleaned metrics dictionary.
    """
    write_metrics = deepcopy(metrics)
    for study_metrics in write_metrics.values():
        study_metrics.pop("trials", None)
        for summary in study_metrics.get("levels", {}).values():
            summary.pop("runtime", None)
        study_metrics.pop("runtime", None)
    return write_metrics


def write_metrics_to_yaml(conf: dict, metrics: dict, base_dir: str = ".") -> str:
    """
    Write the benchmark metrics to results/<benchmark_id>/metrics.yaml.

    Args:
        conf (dict): The configuration dictionary.
        metrics (dict): The benchmark metrics.
        base_dir (str): Directory containing the results folder.

    Returns:
        str: The path of the written file.
    """
    write_metrics = convert_to_standard_types(clean_metrics(metrics))
    results_dir = os.path.join(base_dir, "results", conf["benchmark_id"])
    os.makedirs(results_dir, exist_ok=True)
    path = os.path.join(results_dir, "metrics.yaml")
    with open(path, mode="w", encoding="utf-8") as f:
        yaml.dump(write_metrics, f, sort_keys=False)
    return path


def write_summary_json(path: str, summary: dict) -> None:
    """Write a summary as indented JSON with sorted keys."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(convert_to_standard_types(summary), f, indent=2, sort_keys=True)
        f.write("\n")


def write_trials_csv(path: str, rows: list[dict]) -> None:
    """
    Write per-trial rows with the TRIAL_COLUMNS header.

    Args:
        path (str): Output file.
        rows (list[dict]): Trial records, e.g. from trial_row.
    """
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as csv_file:
        writer = csv.DictWriter(
            csv_file, fieldnames=TRIAL_COLUMNS, extrasaction="ignore", lineterminator="\n"
        )
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def trial_row(trial, study: str = "", level: float | int | str = "") -> dict:
    """Flatten a trial dataclass into a CSV row."""
    row = {f.name: getattr(trial, f.name) for f in fields(trial) if f.name in TRIAL_COLUMNS}
    row.update({"study": study, "level": level})
    return row


def trials_to_arrays(trials: list) -> dict[str, np.ndarray]:
    """
    Stack the fields of trial dataclasses into arrays for the HDF5 store.

    Args:
        trials (list): Trial results.

    Returns:
        dict[str, np.ndarray]: One array per field; estimated K's as (n, 3, 3).
    """
    records = [asdict(trial) for trial in trials]
    arrays = {}
    for name in records[0]:
        values = [record[name] for record in records]
        if name == "K_estimate":
            values = [np.full((3, 3), np.nan) if v is None else v for v in values]
        arrays[name] = np.asarray(values)
    return arrays


def format_time(mean_time, std_time):
    """
    Format mean and std time consistently in ns, µs, ms, or s.

    Args:
        mean_time: The mean time.
        std_time: The standard deviation of the time.

    Returns:
        str: The formatted time string.
    """
    if mean_time < 1e-6:
        return f"{mean_time * 1e9:.2f} ns ± {std_time * 1e9:.2f} ns"
    elif mean_time < 1e-3:
        return f"{mean_time * 1e6:.2f} µs ± {std_time * 1e6:.2f} µs"
    elif mean_time < 1:
        return f"{mean_time * 1e3:.2f} ms ± {std_time * 1e3:.2f} ms"
    else:
        return f"{mean_time:.2f} s ± {std_time:.2f} s"
