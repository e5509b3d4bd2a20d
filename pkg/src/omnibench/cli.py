"""Command-line front door.

Commands::

    omnibench run <scenario> [--policy alg1|alg2] [--dt ms] [--out dir] [--seed n]
    omnibench calibrate <csv>
    omnibench replay <trace.jsonl>
    omnibench serve [scenario] --port N [--tick-ms ms] [--policy name]

``run`` writes trace.jsonl, trace.csv, metrics.json and the plot-data
files path.csv / distance.csv / arm_flag.csv into the output directory
(--out, else $OMNIBENCH_OUT/<name>, else runs/<name>).  ``replay``
recomputes the metrics from a written trace and verifies they equal the
stored ones.  Exit codes are stable:

    0   success
    2   usage error (argparse)
    3   input file missing or unreadable
    4   scenario parse failure
    5   unknown policy
    6   pedestrian script does not cover the run duration
    7   malformed calibration data
    8   trace artifacts missing or unreadable
    9   replay metrics mismatch
    10  could not bind the requested port
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .engine import run_scenario
from .kinematics import (
    CalibrationFormatError,
    calibrate_speed,
    load_calibration_samples,
)
from .policies import make_policy
from .scenario import (
    Scenario,
    ScenarioError,
    ScriptMismatchError,
    UnknownPolicyError,
    load_scenario,
)
from .trace_io import (
    read_metrics_json,
    read_trace_jsonl,
    write_metrics_json,
    write_plot_data,
    write_trace_csv,
    write_trace_jsonl,
)

EXIT_OK = 0
EXIT_MISSING_FILE = 3
EXIT_PARSE = 4
EXIT_UNKNOWN_POLICY = 5
EXIT_SCRIPT_MISMATCH = 6
EXIT_BAD_CALIBRATION = 7
EXIT_BAD_ARTIFACTS = 8
EXIT_REPLAY_MISMATCH = 9
EXIT_BIND = 10

OUTPUT_DIR_ENV = "OMNIBENCH_OUT"


def _fail(code: int, message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _load(path: str) -> Scenario:
    if not Path(path).is_file():
        raise FileNotFoundError(path)
    return load_scenario(path)


def cmd_run(args: argparse.Namespace) -> int:
    try:
        scenario = _load(args.scenario)
    except FileNotFoundError as exc:
        return _fail(EXIT_MISSING_FILE, f"scenario file not found: {exc}")
    except UnknownPolicyError as exc:
        return _fail(EXIT_UNKNOWN_POLICY, str(exc))
    except ScriptMismatchError as exc:
        return _fail(EXIT_SCRIPT_MISMATCH, str(exc))
    except ScenarioError as exc:
        return _fail(EXIT_PARSE, str(exc))

    cfg = scenario.config
    import dataclasses

    if args.dt is not None:
        cfg = dataclasses.replace(cfg, dt_ms=args.dt)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    policy_name = args.policy or scenario.policy

    out_dir = Path(
        args.out
        or os.environ.get(OUTPUT_DIR_ENV, "runs") + os.sep + scenario.name
    )
    out_dir.mkdir(parents=True, exist_ok=True)

    policy = make_policy(policy_name, cfg.safety, cfg.geometry, cfg.sensors)
    try:
        trace, metrics = run_scenario(
            list(scenario.scripts),
            list(scenario.radii),
            policy,
            cfg,
            scenario.duration_ms,
            scenario.robot_start,
        )
    except ValueError as exc:
        return _fail(EXIT_SCRIPT_MISMATCH, str(exc))

    write_trace_jsonl(trace, out_dir / "trace.jsonl")
    write_trace_csv(trace, out_dir / "trace.csv")
    write_plot_data(trace, out_dir)
    write_metrics_json(
        metrics,
        cfg,
        {"policy": policy_name, "scenario": scenario.name},
        out_dir / "metrics.json",
    )
    print(f"scenario   {scenario.name} ({policy_name}, dt={cfg.dt_ms} ms)")
    print(f"steps      {len(trace)}")
    md = metrics.min_distance_cm
    print(f"min dist   {md:.1f} cm" if md is not None else "min dist   n/a")
    print(f"unsafe     {metrics.unsafe_dwell_ms} ms")
    print(f"missed     {metrics.missed_detections}")
    print(f"violations {metrics.violations}")
    print(f"artifacts  {out_dir}")
    return EXIT_OK


def cmd_calibrate(args: argparse.Namespace) -> int:
    if not Path(args.csv).is_file():
        return _fail(EXIT_MISSING_FILE, f"calibration file not found: {args.csv}")
    try:
        samples = load_calibration_samples(args.csv)
    except CalibrationFormatError as exc:
        return _fail(EXIT_BAD_CALIBRATION, f"{args.csv}: {exc}")
    for i, s in enumerate(samples, start=1):
        print(f"{i:>3}: dt={s.dt_ms:g} ms  dd={s.dd_cm:g} cm  v={s.dd_cm / s.dt_ms:.4f} cm/ms")
    mean = calibrate_speed(samples)
    print(f"mean speed over {len(samples)} trials: {mean:.6f} cm/ms (~{mean:.2f})")
    return EXIT_OK


def cmd_replay(args: argparse.Namespace) -> int:
    trace_path = Path(args.trace)
    metrics_path = trace_path.parent / "metrics.json"
    if not trace_path.is_file():
        return _fail(EXIT_MISSING_FILE, f"trace not found: {trace_path}")
    if not metrics_path.is_file():
        return _fail(EXIT_BAD_ARTIFACTS, f"metrics file not found next to trace: {metrics_path}")
    try:
        config, stored = read_metrics_json(metrics_path)
        cfg = _config_from_stored(config)
        trace = read_trace_jsonl(trace_path, cfg.geometry)
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        return _fail(EXIT_BAD_ARTIFACTS, f"unreadable artifacts: {exc}")
    if not trace:
        return _fail(EXIT_BAD_ARTIFACTS, "trace is empty")
    from .engine import compute_metrics

    recomputed = compute_metrics(trace, cfg)
    if recomputed != stored:
        print(f"stored:     {stored}")
        print(f"recomputed: {recomputed}")
        return _fail(EXIT_REPLAY_MISMATCH, "metrics do not match the trace")
    print(f"replay OK: {len(trace)} steps, metrics match")
    return EXIT_OK


def _config_from_stored(config: dict):
    from .engine import SimConfig
    from .kinematics import BaseGeometry
    from .policies import SafetyConfig
    from .sensors import SensorConfig

    return SimConfig(
        dt_ms=int(config["dt_ms"]),
        base_speed_cm_per_ms=float(config["base_speed_cm_per_ms"]),
        geometry=BaseGeometry(
            body_diameter=float(config["body_diameter_cm"]),
            wheel_position_angles=tuple(config["wheel_position_angles_deg"]),
        ),
        sensors=SensorConfig(
            min_range=float(config["sensor_min_range_cm"]),
            max_range=float(config["sensor_max_range_cm"]),
        ),
        safety=SafetyConfig(float(config["safe_distance_cm"])),
        seed=config.get("seed"),
    )


def cmd_serve(args: argparse.Namespace) -> int:
    scenario = None
    if args.scenario is not None:
        try:
            scenario = _load(args.scenario)
        except FileNotFoundError as exc:
            return _fail(EXIT_MISSING_FILE, f"scenario file not found: {exc}")
        except UnknownPolicyError as exc:
            return _fail(EXIT_UNKNOWN_POLICY, str(exc))
        except ScenarioError as exc:
            return _fail(EXIT_PARSE, str(exc))
    from .bridge import BridgeServer

    server = BridgeServer.from_scenario(
        scenario,
        host=args.host,
        port=args.port,
        tick_ms=args.tick_ms,
        policy=args.policy,
        max_steer_cm_s=args.max_steer,
    )
    try:
        server.start()
    except OSError as exc:
        return _fail(EXIT_BIND, f"cannot bind {args.host}:{args.port}: {exc}")
    print(
        f"bridge listening on ws://{args.host}:{server.port} (tick {server.tick_ms} ms)",
        flush=True,
    )
    try:
        server.wait()
    except KeyboardInterrupt:
        print("interrupted, shutting down")
    finally:
        server.stop()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="omnibench",
        description="Desk-scale safe-interaction test bench simulator.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario file and write trace artifacts")
    run.add_argument("scenario", help="scenario file (.toml or .json)")
    run.add_argument("--policy", choices=("alg1", "alg2"), help="override the scenario's policy")
    run.add_argument("--dt", type=int, metavar="MS", help="override the control period")
    run.add_argument("--out", help=f"output directory (default ${OUTPUT_DIR_ENV} or ./runs)")
    run.add_argument("--seed", type=int, help="override the sensor-noise seed")
    run.set_defaults(fn=cmd_run)

    cal = sub.add_parser("calibrate", help="mean straight-line speed from timed trials")
    cal.add_argument("csv", help="CSV file with header dt_ms,dd_cm")
    cal.set_defaults(fn=cmd_calibrate)

    rep = sub.add_parser("replay", help="recompute metrics from a trace and verify them")
    rep.add_argument("trace", help="trace.jsonl written by run (metrics.json must sit next to it)")
    rep.set_defaults(fn=cmd_replay)

    srv = sub.add_parser("serve", help="host a live steering session over a websocket")
    srv.add_argument("scenario", nargs="?", help="optional scenario file for the initial world")
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=8765)
    srv.add_argument("--tick-ms", type=int, default=None, help="tick period (default: scenario dt or 50)")
    srv.add_argument("--policy", choices=("alg1", "alg2"), default=None)
    srv.add_argument("--max-steer", type=float, default=150.0, metavar="CM_S")
    srv.set_defaults(fn=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
