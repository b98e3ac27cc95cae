import json
import os
from copy import deepcopy

import matplotlib.pyplot as plt
import numpy as np
import pytest
import yaml

from benchmark import (
    check_benchmark_config,
    convert_to_standard_types,
    count_histogram,
    deterministic_summary,
    nanmedian,
    run_benchmark,
    run_trial,
    run_trials,
    summarize_trials,
    sweep_figure,
)
from data import NoiseConfig, SceneConfig, load_trials_hdf5

BASE_CONFIG = {
    "benchmark_id": "test_benchmark",
    "seed": 3,
    "n_trials": 4,
    "n_workers": 1,
    "verbose": False,
    "plots": True,
    "scene": {"n_points": 12},
    "accuracy": {"enabled": True},
    "image_noise": {"enabled": True, "sigmas": [0.0, 0.5]},
    "angle_noise": {"enabled": False, "sigmas": [0.0]},
    "points": {"enabled": True, "n_points": [7, 10], "image_sigma": 0.5},
}


@pytest.fixture
def conf():
    return deepcopy(BASE_CONFIG)


def test_noise_free_trial():
    trial = run_trial(SceneConfig(), NoiseConfig(), seed=0, trial_index=0)
    assert trial.status == "ok", f"Trial failed with status '{trial.status}'"
    assert trial.relative_K_error <= 1e-6
    assert trial.relative_f_error <= 1e-6
    assert trial.rotation_error_deg <= 1e-3
    assert trial.translation_error_deg <= 1e-3
    assert 1 <= trial.n_feasible_solutions <= trial.n_real_solutions <= 6
    assert trial.K_estimate.shape == (3, 3)


def test_trials_are_reproducible():
    first = run_trial(SceneConfig(), NoiseConfig(image_sigma=1.0), seed=5, trial_index=2)
    second = run_trial(SceneConfig(), NoiseConfig(image_sigma=1.0), seed=5, trial_index=2)
    assert first.relative_K_error == second.relative_K_error
    assert np.array_equal(first.K_estimate, second.K_estimate)


def test_threaded_trials_match_serial():
    args = (SceneConfig(), NoiseConfig(image_sigma=0.5), 8, 11)
    serial, serial_summary = run_trials(*args, n_workers=1, disable_progress=True)
    threaded, threaded_summary = run_trials(*args, n_workers=3, disable_progress=True)
    assert [t.trial_index for t in threaded] == list(range(8))
    assert np.array_equal(
        [t.relative_K_error for t in serial], [t.relative_K_error for t in threaded], equal_nan=True
    )
    serial_summary.pop("runtime")
    threaded_summary.pop("runtime")
    assert serial_summary == threaded_summary


def test_summary_counts():
    trials, summary = run_trials(SceneConfig(), NoiseConfig(), 5, 0, disable_progress=True)
    assert summary["n_trials"] == 5
    assert sum(summary["feasible_solutions_histogram"].values()) == 5
    assert sum(summary["real_solutions_histogram"].values()) == 5
    assert 0.0 <= summary["fraction_single_feasible"] <= 1.0
    assert summary == summarize_trials(trials)


def test_helpers():
    assert nanmedian([np.nan, 1.0, 3.0]) == 2.0
    assert nanmedian([np.nan]) is None
    assert count_histogram([0, 1, 1, 9]) == {0: 1, 1: 2, 2: 0, 3: 0, 4: 0, 5: 0, 6: 1}
    converted = convert_to_standard_types({"a": np.float64(np.nan), "b": np.arange(2), 1.5: (np.int64(3),)})
    assert converted == {"a": None, "b": [0, 1], 1.5: [3]}


@pytest.mark.parametrize(
    "update, message",
    [
        ({"n_trials": 0}, "n_trials"),
        ({"n_workers": 0}, "n_workers"),
        ({"accuracy": {"enabled": False}, "image_noise": {"enabled": False}, "points": {"enabled": False}}, "enabled"),
        ({"image_noise": {"enabled": True, "sigmas": [0.5, 0.0]}}, "ascending"),
        ({"image_noise": {"enabled": True, "sigmas": []}}, "non-empty"),
        ({"points": {"enabled": True, "n_points": [5, 10]}}, "at least 7"),
    ],
)
def test_invalid_benchmark_config(conf, update, message):
    conf.update(update)
    with pytest.raises(ValueError, match=message):
        check_benchmark_config(conf)


def test_missing_key(conf):
    del conf["scene"]
    with pytest.raises(ValueError, match="scene"):
        check_benchmark_config(conf)


def test_run_benchmark_writes_results(conf, tmp_path):
    check_benchmark_config(conf)
    metrics = run_benchmark(conf, base_dir=str(tmp_path))
    assert set(metrics) == {"accuracy", "image_noise", "points"}

    results_dir = tmp_path / "results" / conf["benchmark_id"]
    for name in ("summary.json", "trials.csv", "trials.hdf5", "metrics.yaml", "metrics_table.txt"):
        assert (results_dir / name).is_file(), f"{name} was not written"
    plots_dir = tmp_path / "plots" / conf["benchmark_id"]
    for name in ("accuracy_histogram.png", "solution_counts.png", "image_noise_sweep.png", "points_sweep.png"):
        assert (plots_dir / name).is_file(), f"Plot {name} was not written"

    summary = json.loads((results_dir / "summary.json").read_text())
    assert summary == json.loads(json.dumps(convert_to_standard_types(deterministic_summary(metrics)), sort_keys=True))
    assert summary["accuracy"]["0"]["median_rel_K_error"] <= 1e-6
    assert set(summary["points"]) == {"7", "10"}

    lines = (results_dir / "trials.csv").read_text().splitlines()
    assert lines[0].startswith("study,level,trial_index,status")
    assert len(lines) == 1 + 5 * conf["n_trials"]

    arrays, attrs = load_trials_hdf5(str(results_dir / "trials.hdf5"))
    assert arrays["accuracy/0/K_estimate"].shape == (conf["n_trials"], 3, 3)
    assert attrs["seed"] == conf["seed"]

    with open(results_dir / "metrics.yaml", encoding="utf-8") as f:
        assert "trials" not in yaml.safe_load(f)["accuracy"]


def test_benchmark_summary_is_deterministic(conf, tmp_path):
    conf["plots"] = False
    run_benchmark(conf, base_dir=str(tmp_path / "first"))
    conf["n_workers"] = 2
    run_benchmark(conf, base_dir=str(tmp_path / "second"))
    paths = [
        os.path.join(tmp_path, run, "results", conf["benchmark_id"], "summary.json")
        for run in ("first", "second")
    ]
    with open(paths[0], "rb") as first, open(paths[1], "rb") as second:
        assert first.read() == second.read(), "summary.json differs between runs"


def test_sweep_calibration_axis_is_logarithmic():
    summaries = {
        sigma: {
            "median_rel_K_error": error,
            "median_rel_f_error": error,
            "median_rotation_error_deg": 10 * error,
            "median_translation_error_deg": None,
        }
        for sigma, error in ((0.0, 1e-9), (0.5, 1e-3), (1.0, 2e-3))
    }
    fig, axes = sweep_figure("image_noise", summaries)
    try:
        assert axes[0].get_yscale() == "log"
        assert axes[1].get_yscale() == "linear"
        bottom, top = axes[0].get_ylim()
        assert bottom <= 1e-9 and top >= 2e-3, f"Calibration axis {bottom, top} hides a level"
    finally:
        plt.close(fig)


@pytest.mark.slow
def test_noise_free_accuracy():
    trials, summary = run_trials(SceneConfig(), NoiseConfig(), 1000, 42, disable_progress=True)
    assert summary["median_rel_K_error"] <= 1e-6
    assert summary["n_failed"] <= 10
    assert summary["fraction_single_feasible"] > 0.8, f"Single feasible fraction {summary['fraction_single_feasible']}"
    histogram = summary["real_solutions_histogram"]
    most_common = max(histogram, key=histogram.get)
    assert most_common in (2, 4), f"Most common number of real solutions is {most_common}: {histogram}"


@pytest.mark.slow
def test_error_grows_with_image_noise():
    medians = [
        run_trials(SceneConfig(), NoiseConfig(image_sigma=sigma), 200, 42, disable_progress=True)[1][
            "median_rel_K_error"
        ]
        for sigma in (0.0, 0.5, 1.0)
    ]
    assert medians[0] < medians[1] < medians[2], f"Medians {medians} do not increase with noise"


@pytest.mark.slow
def test_error_does_not_decrease_with_angle_noise():
    medians = [
        run_trials(SceneConfig(), NoiseConfig(angle_sigma=sigma), 500, 42, disable_progress=True)[1][
            "median_rel_K_error"
        ]
        for sigma in (0.0, 0.03, 0.06, 0.09)
    ]
    assert all(m is not None for m in medians), f"Missing medians {medians}"
    assert medians[0] < medians[1], f"Angle noise {medians[1]} is not worse than noise-free {medians[0]}"
    assert all(
        later >= earlier for earlier, later in zip(medians, medians[1:])
    ), f"Medians {medians} decrease with angle noise"
