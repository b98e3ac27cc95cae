import json
import os
import sys
from argparse import ArgumentParser, ArgumentTypeError, Namespace

import numpy as np
from scipy.spatial.transform import Rotation
from tabulate import tabulate

from benchmark import convert_to_standard_types, relative_K_error, run_trials, write_summary_json
from data import (
    DataFormatError,
    NoiseConfig,
    SceneConfig,
    SceneGenerationError,
    add_noise,
    generate_scene,
    random_rotation,
    read_gyro_csv,
    read_matches,
    write_ground_truth,
    write_gyro_csv,
    write_matches,
)
from gyro import (
    GyroDataError,
    integrate,
    rodrigues_exp,
    synthesize_gyro_samples,
    tau_from_angle,
)
from pipeline import CalibrationReport, FilterConfig, calibrate_pair
from utils import nice_print, read_yaml_config

EXIT_OK = 0
EXIT_REJECTED = 2
EXIT_PARSE_ERROR = 3


class SelfCalParser(ArgumentParser):
    """Argument parser that exits with the parse-error code on bad arguments."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARSE_ERROR, f"{self.prog}: error: {message}\n")


def parse_center(value: str) -> tuple[float, float]:
    try:
        x, y = (float(v) for v in value.split(","))
    except ValueError as err:
        raise ArgumentTypeError(f"expected 'x,y', got '{value}'") from err
    return x, y


def emit_json(document: dict) -> None:
    print(json.dumps(convert_to_standard_types(document), indent=2, sort_keys=True))


def _rotation_traces(args: Namespace, n_files: int) -> list[float]:
    if args.tau is not None:
        values = [float(v) for v in args.tau]
    else:
        values = [tau_from_angle(np.radians(v)) for v in args.angle_deg]
    for tau in values:
        if not -1.0 - 1e-9 <= tau <= 3.0 + 1e-9:
            raise DataFormatError(f"The rotation trace must lie in [-1, 3], got {tau}.")
    if len(values) == 1:
        values = values * n_files
    if len(values) != n_files:
        raise DataFormatError(
            f"Got {len(values)} rotation values for {n_files} matches files."
        )
    return values


def _filter_config(args: Namespace, metadata: dict) -> FilterConfig:
    center = args.center
    if center is None and "image_size" in metadata:
        width, height = metadata["image_size"]
        center = (width / 2.0, height / 2.0)
    return FilterConfig(
        min_angle_deg=args.min_angle_deg,
        pp_window_px=args.pp_window_px,
        center=center,
        epipolar_threshold=args.epipolar_threshold,
        trace_tolerance=args.trace_tolerance,
    )


def cmd_calibrate(args: Namespace) -> int:
    """
    Calibrate from one or more matches files with known rotation angles and
    report the per-pair results and the average over the accepted pairs.
    """
    try:
        taus = _rotation_traces(args, len(args.matches))
        loaded = [read_matches(path) for path in args.matches]
        for path, (corrs, _) in zip(args.matches, loaded):
            if len(corrs) < 7:
                raise DataFormatError(f"{path}: at least 7 correspondences are required, got {len(corrs)}.")
        filters = [_filter_config(args, metadata) for _, metadata in loaded]
    except (DataFormatError, ValueError, TypeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_PARSE_ERROR

    pairs = [
        calibrate_pair(corrs, tau, filter_config, label=path)
        for path, (corrs, _), tau, filter_config in zip(args.matches, loaded, taus, filters)
    ]
    report = CalibrationReport(pairs=pairs)
    document = report.to_dict()
    for pair_doc, pair, (_, metadata) in zip(document["pairs"], pairs, loaded):
        if "K_gt" in metadata and pair.K is not None:
            pair_doc["relative_K_error"] = relative_K_error(pair.K, np.array(metadata["K_gt"]))

    if args.out:
        write_summary_json(os.path.join(args.out, "calibration_report.json"), document)

    if args.json:
        emit_json(document)
    else:
        nice_print("Self-calibration")
        rows = [
            [
                pair.label,
                f"{pair.theta_deg:.3f}",
                pair.status,
                "-" if pair.K is None else f"{pair.K[0, 0]:.2f}",
                "-" if pair.K is None else f"({pair.K[0, 2]:.2f}, {pair.K[1, 2]:.2f})",
                pair.n_feasible,
            ]
            for pair in report.pairs
        ]
        headers = ["Pair", "Angle (deg)", "Status", "f", "(a, b)", "Feasible"]
        print(tabulate(rows, headers, tablefmt="simple_grid"))
        if report.K_mean is not None:
            print(f"\nAverage K over {len(report.accepted)} accepted pair(s):")
            print(np.array2string(report.K_mean, precision=4, suppress_small=True))
        else:
            print("\nNo pair was accepted.")

    return EXIT_OK if report.accepted else EXIT_REJECTED


def cmd_gyro(args: Namespace) -> int:
    """Integrate a gyro CSV over (t_start, t_end] and report theta, tau and R."""
    try:
        samples = read_gyro_csv(args.gyro_csv)
        if len(samples) == 0:
            raise GyroDataError(f"{args.gyro_csv} contains no samples.")
        t_start = samples.timestamps[0] if args.t_start is None else args.t_start
        t_end = samples.timestamps[-1] if args.t_end is None else args.t_end
        window = samples.window(t_start, t_end)
        estimate = integrate(window, t_reference=t_start)
    except (DataFormatError, GyroDataError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_PARSE_ERROR

    document = {
        "theta_deg": estimate.theta_deg,
        "tau": estimate.tau,
        "R": estimate.R,
        "t_start": t_start,
        "t_end": t_end,
        "n_samples": len(window),
    }
    if args.json:
        emit_json(document)
    else:
        nice_print("Gyro integration")
        print(f"theta = {estimate.theta_deg:.6f} deg")
        print(f"tau   = {estimate.tau:.9f}")
        print("R =")
        print(np.array2string(estimate.R, precision=9, suppress_small=True))
    return EXIT_OK


def _scene_config(args: Namespace) -> SceneConfig:
    scene = read_yaml_config(args.config).get("scene", {}) if args.config else {}
    if args.n_points is not None:
        scene["n_points"] = args.n_points
    return SceneConfig(**scene)


def cmd_synth(args: Namespace) -> int:
    """
    Write a synthetic pair (matches file, gyro CSV and ground-truth JSON), or
    with --trials run that many synthetic trials and report their summary.
    """
    try:
        scene_cfg = _scene_config(args)
        noise_cfg = NoiseConfig(image_sigma=args.image_sigma, angle_sigma=args.angle_sigma)
    except (ValueError, TypeError, OSError) as err:
        print(f"error: invalid configuration: {err}", file=sys.stderr)
        return EXIT_PARSE_ERROR

    if args.trials:
        _, summary = run_trials(
            scene_cfg,
            noise_cfg,
            args.trials,
            args.seed,
            disable_progress=args.json,
        )
        summary = {k: v for k, v in summary.items() if k != "runtime"}
        if args.out:
            write_summary_json(os.path.join(args.out, "summary.json"), summary)
        if args.json:
            emit_json(summary)
        else:
            nice_print(f"{args.trials} synthetic trials")
            for key, value in summary.items():
                print(f"{key}: {value}")
        return EXIT_OK

    rng = np.random.default_rng(args.seed)
    R = None
    if args.angle_deg is not None:
        R = random_rotation(rng, args.angle_deg, args.angle_deg)
    try:
        scene = generate_scene(scene_cfg, rng, R=R)
    except SceneGenerationError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_REJECTED
    corrs, theta = add_noise(scene.corrs, noise_cfg, scene.theta, rng)

    # gyro stream of the (possibly noisy) angle about the true axis
    rotvec = Rotation.from_matrix(scene.R).as_rotvec()
    R_gyro = rodrigues_exp(rotvec * theta / scene.theta) if scene.theta > 0 else np.eye(3)
    samples = synthesize_gyro_samples(R_gyro, args.gyro_duration, args.gyro_rate)

    out = args.out or "synthetic"
    os.makedirs(out, exist_ok=True)
    metadata = {
        "K_gt": scene.K,
        "image_size": [scene_cfg.image_width, scene_cfg.image_height],
        "theta_deg": float(np.degrees(scene.theta)),
        "seed": args.seed,
    }
    write_matches(os.path.join(out, "matches.txt"), corrs, metadata)
    write_gyro_csv(os.path.join(out, "gyro.csv"), samples)
    write_ground_truth(os.path.join(out, "ground_truth.json"), scene.K, scene.R, scene.t, scene.theta)

    document = {
        "out": out,
        "n_points": len(corrs),
        "theta_deg": float(np.degrees(scene.theta)),
        "tau": tau_from_angle(scene.theta),
        "gyro_duration": args.gyro_duration,
    }
    if args.json:
        emit_json(document)
    else:
        nice_print("Synthetic pair")
        print(f"Wrote matches.txt, gyro.csv and ground_truth.json to {out}")
        print(f"rotation angle {document['theta_deg']:.4f} deg, {len(corrs)} points")
    return EXIT_OK


def build_parser() -> ArgumentParser:
    parser = SelfCalParser(description="Two-view self-calibration with a known rotation angle.")
    subparsers = parser.add_subparsers(dest="command", required=True)

    calibrate = subparsers.add_parser("calibrate", help="Calibrate from matches files.")
    calibrate.add_argument("matches", nargs="+", help="Matches files with 'x1 y1 x2 y2' lines.")
    rotation = calibrate.add_mutually_exclusive_group(required=True)
    rotation.add_argument("--angle-deg", nargs="+", type=float, help="Rotation angle(s) in degrees.")
    rotation.add_argument("--tau", nargs="+", type=float, help="Rotation trace(s) 2 cos(theta) + 1.")
    calibrate.add_argument("--min-angle-deg", type=float, default=5.0)
    calibrate.add_argument("--pp-window-px", type=float, default=50.0)
    calibrate.add_argument(
        "--center",
        type=parse_center,
        default=None,
        help="Principal point window centre 'x,y' (default: image centre when known).",
    )
    calibrate.add_argument("--epipolar-threshold", type=float, default=1e-2)
    calibrate.add_argument("--trace-tolerance", type=float, default=0.05)
    calibrate.add_argument("--json", action="store_true", help="Print a JSON report only.")
    calibrate.add_argument("--out", type=str, default=None, help="Directory for the JSON report.")
    calibrate.set_defaults(func=cmd_calibrate)

    gyro = subparsers.add_parser("gyro", help="Integrate a gyro CSV.")
    gyro.add_argument("gyro_csv", help="CSV with header timestamp_s,wx,wy,wz.")
    gyro.add_argument("--t-start", type=float, default=None)
    gyro.add_argument("--t-end", type=float, default=None)
    gyro.add_argument("--json", action="store_true")
    gyro.set_defaults(func=cmd_gyro)

    synth = subparsers.add_parser("synth", help="Generate synthetic data or run synthetic trials.")
    synth.add_argument("--config", type=str, default=None, help="YAML file with a 'scene' section.")
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--n-points", type=int, default=None)
    synth.add_argument("--angle-deg", type=float, default=None, help="Fixed rotation angle.")
    synth.add_argument("--image-sigma", type=float, default=0.0)
    synth.add_argument("--angle-sigma", type=float, default=0.0)
    synth.add_argument("--trials", type=int, default=0)
    synth.add_argument("--gyro-rate", type=float, default=200.0)
    synth.add_argument("--gyro-duration", type=float, default=1.0)
    synth.add_argument("--json", action="store_true")
    synth.add_argument("--out", type=str, default=None)
    synth.set_defaults(func=cmd_synth)
    return parser


def main(args: Namespace) -> int:
    """
    Dispatch a parsed command line.

    Args:
        args (Namespace): The parsed command line arguments.

    Returns:
        int: 0 on success, 2 if every pair was rejected, 3 on input errors.
    """
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main(build_parser().parse_args()))
