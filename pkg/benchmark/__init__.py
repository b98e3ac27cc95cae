from .bench_fcts import (
    TrialResult,
    run_trial,
    summarize_trials,
    run_trials,
    study_levels,
    study_configs,
    run_study,
    run_benchmark,
    deterministic_summary,
    write_results,
    make_plots,
    tabular_summary,
)
from .bench_plots import (
    save_plot,
    save_plot_counter,
    plot_error_histogram,
    plot_solution_counts,
    plot_sweep,
    sweep_figure,
)
from .bench_utils import (
    check_benchmark_config,
    relative_K_error,
    nanmedian,
    count_histogram,
    convert_to_standard_types,
    clean_metrics,
    write_metrics_to_yaml,
    write_summary_json,
    write_trials_csv,
    trial_row,
    trials_to_arrays,
    format_time,
)

__all__ = [
    "TrialResult",
    "run_trial",
    "summarize_trials",
    "run_trials",
    "study_levels",
    "study_configs",
    "run_study",
    "run_benchmark",
    "deterministic_summary",
    "write_results",
    "make_plots",
    "tabular_summary",
    "save_plot",
    "save_plot_counter",
    "plot_error_histogram",
    "plot_solution_counts",
    "plot_sweep",
    "sweep_figure",
    "check_benchmark_config",
    "relative_K_error",
    "nanmedian",
    "count_histogram",
    "convert_to_standard_types",
    "clean_metrics",
    "write_metrics_to_yaml",
    "write_summary_json",
    "write_trials_csv",
    "trial_row",
    "trials_to_arrays",
    "format_time",
]
