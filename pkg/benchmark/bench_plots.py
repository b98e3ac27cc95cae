import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

SWEEP_LABELS = {
    "image_noise": "Image noise std (pixels)",
    "angle_noise": "Angle noise std",
    "points": "Number of points N",
}


def save_plot(
    plt,
    filename: str,
    conf: dict,
    dpi: int = 300,
    base_dir: str = ".",
    increase_count: bool = False,
) -> str:
    """
    Save the plot to plots/<benchmark_id>/, creating necessary directories if they don't exist.

    Args:
        plt (matplotlib.pyplot): The plot object to save.
        filename (str): The desired filename for the plot.
        conf (dict): The configuration dictionary.
        dpi (int): The resolution of the saved plot.
        base_dir (str, optional): Directory containing the plots folder.
        increase_count (bool, optional): Whether to increment the filename count if a file already exists.

    Returns:
        str: The path of the saved plot.

    Raises:
        ValueError: If the configuration dictionary does not contain the required keys.
    """
    if "benchmark_id" not in conf:
        raise ValueError("Configuration dictionary must contain 'benchmark_id'.")

    plot_dir = os.path.join(base_dir, "plots", conf["benchmark_id"])
    os.makedirs(plot_dir, exist_ok=True)

    filepath = save_plot_counter(filename, plot_dir, increase_count=increase_count)
    plt.savefig(filepath, dpi=dpi, bbox_inches="tight")
    if conf.get("verbose", False):
        print(f"Plot saved as: {filepath}")
    return filepath


def save_plot_counter(
    filename: str, directory: str, increase_count: bool = True
) -> str:
    """
    Return a path for the plot, with an incremented filename if a file with
    the same name already exists.

    Args:
        filename (str): The desired filename for the plot.
        directory (str): The directory to save the plot in.
        increase_count (bool, optional): Whether to increment the filename count if a file already exists.

    Returns:
        str: The full path to the saved plot.
    """
    if not increase_count:
        return os.path.join(directory, filename)

    base, ext = os.path.splitext(filename)
    counter = 1
    filepath = os.path.join(directory, filename)
    while os.path.exists(filepath):
        filepath = os.path.join(directory, f"{base}_{counter}{ext}")
        counter += 1
    return filepath


def plot_error_histogram(
    relative_errors: list[float], conf: dict, save: bool = True, base_dir: str = "."
) -> None:
    """
    Histogram of log10 of the relative calibration error on noise-free data.

    Args:
        relative_errors (list[float]): Per-trial relative K errors (NaN for failed trials).
        conf (dict): Configuration dictionary.
        save (bool, optional): Whether to save the plot.
        base_dir (str, optional): Directory containing the plots folder.
    """
    errors = np.asarray(relative_errors, dtype=float)
    errors = errors[np.isfinite(errors)]
    errors = np.maximum(errors, np.finfo(float).eps)

    fig, ax = plt.subplots(figsize=(8, 5))
    ax.hist(np.log10(errors), bins=50, color="tab:blue", alpha=0.8)
    if errors.size:
        median = np.median(errors)
        ax.axvline(np.log10(median), color="black", linestyle="--", label=f"median {median:.1e}")
        ax.legend()
    ax.set_xlabel(r"$\log_{10}$ relative error of K")
    ax.set_ylabel("Number of trials")
    ax.set_title("Numerical accuracy (noise-free data)")

    if save:
        save_plot(plt, "accuracy_histogram.png", conf, base_dir=base_dir)
    plt.close(fig)


def plot_solution_counts(
    n_real: list[int], n_feasible: list[int], conf: dict, save: bool = True, base_dir: str = "."
) -> None:
    """
    Distribution of the number of real and feasible solutions per trial.

    Args:
        n_real (list[int]): Real solutions per trial.
        n_feasible (list[int]): Feasible solutions per trial.
        conf (dict): Configuration dictionary.
        save (bool, optional): Whether to save the plot.
        base_dir (str, optional): Directory containing the plots folder.
    """
    counts = np.arange(7)
    total = max(len(n_real), 1)
    real = [np.sum(np.asarray(n_real) == k) / total for k in counts]
    feasible = [np.sum(np.asarray(n_feasible) == k) / total for k in counts]

    fig, ax = plt.subplots(figsize=(8, 5))
    width = 0.4
    ax.bar(counts - width / 2, real, width, label="real", color="tab:gray")
    ax.bar(counts + width / 2, feasible, width, label="feasible (p > 0)", color="tab:blue")
    ax.set_xticks(counts)
    ax.set_xlabel("Number of solutions")
    ax.set_ylabel("Fraction of trials")
    ax.set_title("Number of solutions per trial")
    ax.legend()

    if save:
        save_plot(plt, "solution_counts.png", conf, base_dir=base_dir)
    plt.close(fig)


def sweep_figure(study: str, summaries: dict):
    """
    Figure with the median calibration errors (log scale) and the median
    rotation and translation errors over the levels of a sweep.

    Args:
        study (str): "image_noise", "angle_noise" or "points".
        summaries (dict): Level -> summary, as returned by run_study.

    Returns:
        tuple: The matplotlib figure and its two axes.
    """
    levels = list(summaries.keys())

    def series(key):
        return [np.nan if summaries[l][key] is None else summaries[l][key] for l in levels]

    fig, axes = plt.subplots(1, 2, figsize=(12, 5))
    axes[0].plot(levels, series("median_rel_K_error"), "o-", label="K")
    axes[0].plot(levels, series("median_rel_f_error"), "s--", label="f")
    axes[0].set_yscale("log")
    axes[0].set_ylabel("Median relative error")
    axes[0].set_title("Calibration")
    axes[0].legend()

    axes[1].plot(levels, series("median_rotation_error_deg"), "o-", label="rotation")
    axes[1].plot(levels, series("median_translation_error_deg"), "s--", label="translation")
    axes[1].set_ylabel("Median error (degrees)")
    axes[1].set_title("Relative pose")
    axes[1].legend()

    for ax in axes:
        ax.set_xlabel(SWEEP_LABELS.get(study, study))
        if study != "points":
            ax.set_xlim(left=min(levels))
    fig.tight_layout()
    return fig, axes


def plot_sweep(
    study: str, summaries: dict, conf: dict, save: bool = True, base_dir: str = "."
) -> None:
    """
    Plot a sweep with sweep_figure and save it as <study>_sweep.png.

    Args:
        study (str): "image_noise", "angle_noise" or "points".
        summaries (dict): Level -> summary, as returned by run_study.
        conf (dict): Configuration dictionary.
        save (bool, optional): Whether to save the plot.
        base_dir (str, optional): Directory containing the plots folder.
    """
    fig, _ = sweep_figure(study, summaries)
    if save:
        save_plot(plt, f"{study}_sweep.png", conf, base_dir=base_dir)
    plt.close(fig)
