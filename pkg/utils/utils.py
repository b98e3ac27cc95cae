import os
import random
from queue import Empty, Queue
from threading import Lock, Thread
from typing import Any, Callable, Sequence

import numpy as np
import yaml
from tqdm import tqdm


class SelfCalibrationError(Exception):
    """
    Base class for all errors raised by the self-calibration pipeline.
    """

    pass


def read_yaml_config(config_path: str) -> dict:
    """
    Read a YAML configuration file.

    Args:
        config_path (str): Path to the YAML configuration file.

    Returns:
        dict: The configuration dictionary.
    """
    with open(config_path, "r", encoding="utf-8") as file:
        config = yaml.safe_load(file)
    return config


def create_results_dir(
    base_dir: str = ".", subfolder: str = "results", unique_id: str = ""
) -> str:
    """
    Create a directory based on a unique identifier inside a specified subfolder of the base directory.

    Args:
        base_dir (str): The base directory where the subfolder and unique directory will be created.
        subfolder (str): The subfolder inside the base directory to include before the unique directory.
        unique_id (str): A unique identifier to be included in the directory name.

    Returns:
        str: The path of the created unique directory within the specified subfolder.
    """
    full_path = os.path.join(base_dir, subfolder, unique_id)
    os.makedirs(full_path, exist_ok=True)
    return full_path


def set_random_seeds(seed: int):
    """
    Set random seeds for reproducibility.

    Args:
        seed (int): The random seed to set.
    """
    random.seed(seed)
    np.random.seed(seed)


def trial_rng(seed: int, trial_index: int) -> np.random.Generator:
    """
    Independent random stream for one trial. Depends only on (seed, trial_index),
    so trials can be run in any order or in parallel.
    """
    return np.random.default_rng([seed, trial_index])


def nice_print(message: str, width: int = 80) -> None:
    """
    Print a message in a nicely formatted way with a fixed width.

    Args:
        message (str): The message to print.
        width (int): The width of the printed box. Default is 80.
    """
    padding = (width - len(message) - 2) // 2
    padding_left = padding
    padding_right = padding

    # If message length is odd, add one more space to the right
    if (width - len(message)) % 2 != 0:
        padding_right += 1

    border = "-" * width
    print(
        f"\n{border}\n|{' ' * padding_left}{message}{' ' * padding_right}|\n{border}\n"
    )


def make_description(study: str, level: str, n_points: str, label: str) -> str:
    """
    Create a formatted description for the progress bar that ensures consistent alignment.

    Args:
        study (str): The study (e.g. "accuracy", "image_noise", "angle_noise", "points").
        level (str): The sweep level of the study (e.g. the noise sigma).
        n_points (str): The number of correspondences per trial.
        label (str): A free label shown first (e.g. the benchmark id).

    Returns:
        str: A formatted description string for the progress bar.
    """
    label = label.ljust(16)
    study = study.ljust(12)
    level = level.ljust(6)
    n_points = f"(N={n_points})".ljust(8) if n_points else "".ljust(8)
    return f"{label} {study} {level} {n_points}"


def get_progress_bar(
    tasks: Sequence, description: str = "", disable: bool = False
) -> tqdm:
    """
    Create a progress bar with a specific description.

    Args:
        tasks (Sequence): The tasks to be executed.
        description (str): The description shown left of the bar.
        disable (bool): Whether to suppress the bar entirely.

    Returns:
        tqdm: The created progress bar.
    """
    return tqdm(
        total=len(tasks),
        desc=description or make_description("", "", "", "Overall Progress"),
        position=0,
        leave=True,
        disable=disable,
        bar_format="{l_bar}{bar} | {n_fmt:>5}/{total_fmt} trials done [elapsed time: {elapsed}]",
    )


def _call_task(func: Callable, index: int, args: tuple, failures: dict) -> Any:
    try:
        return func(*args)
    except Exception as e:
        tqdm.write(f"Exception for task {index}: {e}")
        failures[index] = e
        return None


def _worker(
    task_queue: Queue,
    func: Callable,
    results: dict,
    failures: dict,
    lock: Lock,
    progress_bar: tqdm,
):
    """
    Worker function to process tasks from the task queue. Each task is an
    (index, args) tuple, results are stored under the task index. A failing
    task is recorded in failures and the worker moves on to the next one.
    """
    while True:
        try:
            index, args = task_queue.get_nowait()
        except Empty:
            return
        result = _call_task(func, index, args, failures)
        with lock:
            results[index] = result
            progress_bar.update(1)
        task_queue.task_done()


def run_tasks(
    func: Callable,
    tasks: Sequence[tuple],
    n_workers: int = 1,
    description: str = "",
    disable_progress: bool = False,
) -> list[Any]:
    """
    Execute func(*task) for every task, sequentially or on a pool of threads.
    The returned list is in task order regardless of the number of workers.

    Every task is run even if some of them fail. Failures are reported with
    tqdm.write as they happen, and the exception of the first failing task
    (in task order) is raised once all tasks are done.

    Args:
        func (Callable): The function to call for each task.
        tasks (Sequence[tuple]): The argument tuples.
        n_workers (int): Number of worker threads. 1 runs sequentially.
        description (str): Progress bar description.
        disable_progress (bool): Whether to hide the progress bar.

    Returns:
        list: The results, one per task.

    Raises:
        Exception: The exception of the first failing task, if any.
    """
    progress_bar = get_progress_bar(tasks, description, disable=disable_progress)
    results = {}
    failures = {}

    if n_workers <= 1:
        for index, task in enumerate(tasks):
            results[index] = _call_task(func, index, task, failures)
            progress_bar.update(1)
    else:
        task_queue = Queue()
        for index, task in enumerate(tasks):
            task_queue.put((index, task))

        lock = Lock()
        threads = []
        for _ in range(n_workers):
            thread = Thread(
                target=_worker,
                args=(task_queue, func, results, failures, lock, progress_bar),
            )
            thread.start()
            threads.append(thread)

        for thread in threads:
            thread.join()

    progress_bar.close()
    if failures:
        first = min(failures)
        raise failures[first]
    return [results[index] for index in range(len(tasks))]
