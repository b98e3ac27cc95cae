import csv
import json
import os

import h5py
import numpy as np

from geometry import Correspondences
from gyro import GyroSamples
from utils import SelfCalibrationError

GYRO_HEADER = ["timestamp_s", "wx", "wy", "wz"]


class DataFormatError(SelfCalibrationError):
    """
    Error for missing or malformed input files (matches, gyro CSV, ground truth).
    """

    pass


def _format_number(value: float) -> str:
    return repr(float(value))


def write_matches(
    path: str, corrs: Correspondences, metadata: dict | None = None
) -> None:
    """
    Write correspondences as "x1 y1 x2 y2" lines. Metadata is written as
    "# key: value" header lines with JSON values.

    Args:
        path (str): Output file.
        corrs (Correspondences): The correspondences.
        metadata (dict, optional): Header entries, e.g. K_gt or theta_deg.
    """
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as file:
        file.write("# x1 y1 x2 y2 (pixels)\n")
        for key, value in (metadata or {}).items():
            if isinstance(value, np.ndarray):
                value = value.tolist()
            file.write(f"# {key}: {json.dumps(value)}\n")
        for (x1, y1), (x2, y2) in zip(corrs.x1, corrs.x2):
            file.write(" ".join(_format_number(v) for v in (x1, y1, x2, y2)) + "\n")


def read_matches(path: str) -> tuple[Correspondences, dict]:
    """
    Read a matches file.

    Args:
        path (str): The file.

    Returns:
        tuple[Correspondences, dict]: The correspondences and the header metadata.

    Raises:
        DataFormatError: If the file is missing or a line does not hold four numbers.
    """
    if not os.path.isfile(path):
        raise DataFormatError(f"Matches file {path} not found.")
    rows = []
    metadata = {}
    with open(path, "r", encoding="utf-8") as file:
        for line_number, line in enumerate(file, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, sep, value = line[1:].partition(":")
                if sep and key.strip() and " " not in key.strip():
                    try:
                        metadata[key.strip()] = json.loads(value)
                    except json.JSONDecodeError:
                        metadata[key.strip()] = value.strip()
                continue
            fields = line.split()
            if len(fields) != 4:
                raise DataFormatError(
                    f"{path}:{line_number}: expected 4 values 'x1 y1 x2 y2', got {len(fields)}."
                )
            try:
                rows.append([float(v) for v in fields])
            except ValueError as err:
                raise DataFormatError(f"{path}:{line_number}: {err}") from err
    if not rows:
        raise DataFormatError(f"Matches file {path} contains no correspondences.")
    data = np.array(rows)
    return Correspondences(data[:, :2], data[:, 2:]), metadata


def write_gyro_csv(path: str, samples: GyroSamples) -> None:
    """Write a gyro stream as "timestamp_s,wx,wy,wz" rows with a header."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as csv_file:
        writer = csv.writer(csv_file, lineterminator="\n")
        writer.writerow(GYRO_HEADER)
        for timestamp, omega in zip(samples.timestamps, samples.omega):
            writer.writerow([_format_number(timestamp), *(_format_number(w) for w in omega)])


def read_gyro_csv(path: str) -> GyroSamples:
    """
    Read a gyro CSV with header "timestamp_s,wx,wy,wz".

    Raises:
        DataFormatError: If the file is missing, the header is wrong or a value does not parse.
        GyroDataError: If the timestamps are not strictly increasing.
    """
    if not os.path.isfile(path):
        raise DataFormatError(f"Gyro file {path} not found.")
    with open(path, "r", encoding="utf-8", newline="") as csv_file:
        reader = csv.reader(csv_file)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != GYRO_HEADER:
            raise DataFormatError(f"{path}: expected header {','.join(GYRO_HEADER)}, got {header}.")
        rows = []
        for line_number, row in enumerate(reader, start=2):
            if not row or all(not v.strip() for v in row):
                continue
            if len(row) != 4:
                raise DataFormatError(f"{path}:{line_number}: expected 4 columns, got {len(row)}.")
            try:
                rows.append([float(v) for v in row])
            except ValueError as err:
                raise DataFormatError(f"{path}:{line_number}: {err}") from err
    data = np.array(rows).reshape(-1, 4)
    return GyroSamples(data[:, 0], data[:, 1:])


def write_ground_truth(
    path: str, K: np.ndarray, R: np.ndarray, t: np.ndarray, theta: float
) -> None:
    """Ground-truth sidecar of a synthetic pair: K, R, t and theta (radians and degrees)."""
    content = {
        "K": np.asarray(K).tolist(),
        "R": np.asarray(R).tolist(),
        "t": np.asarray(t).tolist(),
        "theta_rad": float(theta),
        "theta_deg": float(np.degrees(theta)),
    }
    with open(path, "w", encoding="utf-8", newline="\n") as file:
        json.dump(content, file, indent=2)
        file.write("\n")


def read_ground_truth(path: str) -> dict:
    """
    Read a ground-truth sidecar. Matrices are returned as arrays.

    Raises:
        DataFormatError: If the file is missing or lacks a required key.
    """
    if not os.path.isfile(path):
        raise DataFormatError(f"Ground-truth file {path} not found.")
    with open(path, "r", encoding="utf-8") as file:
        try:
            content = json.load(file)
        except json.JSONDecodeError as err:
            raise DataFormatError(f"{path}: {err}") from err
    for key in ("K", "R", "t", "theta_rad"):
        if key not in content:
            raise DataFormatError(f"{path}: missing key '{key}'.")
    for key in ("K", "R", "t"):
        content[key] = np.array(content[key], dtype=float)
    return content


def save_trials_hdf5(path: str, arrays: dict[str, np.ndarray], attrs: dict | None = None) -> None:
    """
    Store per-trial arrays (errors, counts, estimated K's) with metadata attributes.

    Args:
        path (str): The HDF5 file.
        arrays (dict[str, np.ndarray]): One dataset per entry.
        attrs (dict, optional): Scalar or string metadata, e.g. seed and noise levels.
    """
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with h5py.File(path, "w") as f:
        for name, values in arrays.items():
            values = np.asarray(values)
            if values.dtype.kind in "US":
                values = values.astype("S")
            f.create_dataset(name, data=values)
        for key, value in (attrs or {}).items():
            f.attrs[key] = value


def load_trials_hdf5(path: str) -> tuple[dict[str, np.ndarray], dict]:
    """
    Load a trial store written by save_trials_hdf5.

    Raises:
        DataFormatError: If the file does not exist.
    """
    if not os.path.isfile(path):
        raise DataFormatError(f"Trial store {path} not found.")
    arrays = {}

    def collect(name, node):
        if isinstance(node, h5py.Dataset):
            values = node[()]
            if isinstance(values, np.ndarray) and values.dtype.kind == "S":
                values = values.astype(str)
            arrays[name] = values

    with h5py.File(path, "r") as f:
        f.visititems(collect)
        attrs = dict(f.attrs)
    return arrays, attrs
