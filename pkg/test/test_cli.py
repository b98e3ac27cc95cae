import json

import numpy as np
import pytest

from data import read_ground_truth
from run_selfcal import EXIT_OK, EXIT_PARSE_ERROR, EXIT_REJECTED, build_parser, main


def run(argv: list[str]) -> int:
    return main(build_parser().parse_args(argv))


def run_json(argv: list[str], capsys) -> tuple[int, dict]:
    capsys.readouterr()
    code = run(argv + ["--json"])
    return code, json.loads(capsys.readouterr().out)


@pytest.fixture
def synthetic_pair(tmp_path):
    out = tmp_path / "pair"
    assert run(["synth", "--seed", "4", "--out", str(out)]) == EXIT_OK
    return out


def test_synth_writes_pair(synthetic_pair):
    for name in ("matches.txt", "gyro.csv", "ground_truth.json"):
        assert (synthetic_pair / name).is_file(), f"{name} was not written"
    truth = read_ground_truth(str(synthetic_pair / "ground_truth.json"))
    assert 5.0 <= truth["theta_deg"] <= 30.0


def test_calibrate_with_true_angle(synthetic_pair, capsys):
    truth = read_ground_truth(str(synthetic_pair / "ground_truth.json"))
    code, report = run_json(
        ["calibrate", str(synthetic_pair / "matches.txt"), "--angle-deg", repr(truth["theta_deg"])], capsys
    )
    assert code == EXIT_OK
    pair = report["pairs"][0]
    assert pair["status"] == "accepted"
    assert pair["relative_K_error"] <= 1e-6, f"Relative K error {pair['relative_K_error']:.2e}"
    assert np.allclose(report["K_mean"], truth["K"], rtol=1e-6)


def test_gyro_then_calibrate(synthetic_pair, capsys, tmp_path):
    truth = read_ground_truth(str(synthetic_pair / "ground_truth.json"))
    code, gyro = run_json(["gyro", str(synthetic_pair / "gyro.csv")], capsys)
    assert code == EXIT_OK
    assert abs(gyro["theta_deg"] - truth["theta_deg"]) <= 1e-6
    assert np.allclose(gyro["R"], truth["R"], atol=1e-9)

    out = tmp_path / "report"
    code, report = run_json(
        ["calibrate", str(synthetic_pair / "matches.txt"), "--tau", repr(gyro["tau"]), "--out", str(out)],
        capsys,
    )
    assert code == EXIT_OK
    assert report["pairs"][0]["relative_K_error"] <= 1e-4
    assert json.loads((out / "calibration_report.json").read_text()) == report


def test_small_angle_is_rejected(synthetic_pair, capsys):
    code, report = run_json(
        ["calibrate", str(synthetic_pair / "matches.txt"), "--angle-deg", "2"], capsys
    )
    assert code == EXIT_REJECTED
    assert report["pairs"][0]["status"] == "rejected: angle below threshold"
    assert report["K_mean"] is None


def test_table_output(synthetic_pair, capsys):
    truth = read_ground_truth(str(synthetic_pair / "ground_truth.json"))
    assert run(["calibrate", str(synthetic_pair / "matches.txt"), "--angle-deg", str(truth["theta_deg"])]) == EXIT_OK
    assert "accepted" in capsys.readouterr().out


def write_csv(path, rows):
    path.write_text("timestamp_s,wx,wy,wz\n" + "".join(",".join(map(repr, row)) + "\n" for row in rows))


def test_gyro_constant_rate(tmp_path, capsys):
    path = tmp_path / "gyro.csv"
    write_csv(path, [(k / 100, 0.0, 0.0, 0.5) for k in range(101)])
    code, gyro = run_json(["gyro", str(path)], capsys)
    assert code == EXIT_OK
    assert np.isclose(gyro["theta_deg"], 28.6479, atol=1e-4)
    assert gyro["n_samples"] == 100


def test_gyro_zero_rate(tmp_path, capsys):
    path = tmp_path / "gyro.csv"
    write_csv(path, [(k / 10, 0.0, 0.0, 0.0) for k in range(11)])
    code, gyro = run_json(["gyro", str(path)], capsys)
    assert code == EXIT_OK
    assert gyro["theta_deg"] == 0.0
    assert gyro["tau"] == 3.0


def test_gyro_window(tmp_path, capsys):
    path = tmp_path / "gyro.csv"
    write_csv(path, [(k / 100, 0.0, 1.0, 0.0) for k in range(101)])
    code, gyro = run_json(["gyro", str(path), "--t-start", "0.2", "--t-end", "0.5"], capsys)
    assert code == EXIT_OK
    assert np.isclose(gyro["theta_deg"], np.degrees(0.3), atol=1e-9)


def test_gyro_bad_timestamps(tmp_path):
    path = tmp_path / "gyro.csv"
    write_csv(path, [(0.2, 0.0, 0.0, 0.0), (0.1, 0.0, 0.0, 0.0)])
    assert run(["gyro", str(path)]) == EXIT_PARSE_ERROR


def test_missing_matches_file(tmp_path):
    assert run(["calibrate", str(tmp_path / "missing.txt"), "--angle-deg", "10"]) == EXIT_PARSE_ERROR


def test_rotation_count_mismatch(synthetic_pair):
    matches = str(synthetic_pair / "matches.txt")
    assert run(["calibrate", matches, matches, matches, "--angle-deg", "10", "12"]) == EXIT_PARSE_ERROR


@pytest.mark.parametrize(
    "argv",
    [
        ["calibrate", "matches.txt", "--angle-deg", "10", "--center", "nonsense"],
        ["calibrate", "matches.txt"],
        ["calibrate", "matches.txt", "--angle-deg", "10", "--tau", "2.9"],
        ["unknown"],
    ],
)
def test_argument_errors(argv):
    with pytest.raises(SystemExit) as exc_info:
        build_parser().parse_args(argv)
    assert exc_info.value.code == EXIT_PARSE_ERROR


def test_same_seed_same_files(tmp_path):
    for name in ("first", "second"):
        assert run(["synth", "--seed", "9", "--image-sigma", "0.5", "--out", str(tmp_path / name)]) == EXIT_OK
    for name in ("matches.txt", "gyro.csv", "ground_truth.json"):
        first = (tmp_path / "first" / name).read_bytes()
        second = (tmp_path / "second" / name).read_bytes()
        assert first == second, f"{name} differs between runs with the same seed"


def test_synthetic_trials(tmp_path, capsys):
    code, summary = run_json(["synth", "--trials", "3", "--seed", "1", "--out", str(tmp_path)], capsys)
    assert code == EXIT_OK
    assert summary["n_trials"] == 3
    assert "runtime" not in summary
    assert summary["median_rel_K_error"] <= 1e-6
    assert json.loads((tmp_path / "summary.json").read_text()) == summary


@pytest.mark.parametrize("tau", ["-1.5", "3.2"])
def test_rotation_trace_out_of_range(synthetic_pair, tau, capsys):
    matches = str(synthetic_pair / "matches.txt")
    assert run(["calibrate", matches, "--tau", tau]) == EXIT_PARSE_ERROR
    assert "[-1, 3]" in capsys.readouterr().err
