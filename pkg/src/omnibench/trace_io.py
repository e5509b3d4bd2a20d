"""Stable on-disk trace formats.

JSONL trace (one record per line, keys always in this order)::

    step          int, 1-based step index
    t_ms          int, simulation time at the end of the step
    robot         {"x": cm, "y": cm, "heading": rad}
    pedestrians   [{"x": cm, "y": cm, "radius": cm}, ...]
    readings      six entries ordered by sensor id; cm or null (no echo)
    arm           {"servo1": deg, "servo2": deg, "reacting": bool}
    command       {"arm": {"servo1","servo2"} | null, "base": label | null}
    dist_cm       centre distance to the nearest pedestrian, cm

CSV projection (plot-friendly, first pedestrian only)::

    step,t_ms,robot_x,robot_y,ped_x,ped_y,dist_cm,arm_reacting,s1,s2,s3,s4,s5,s6

``arm_reacting`` is 0/1; out-of-range readings serialize as empty
fields.  Plot-data files carry subsets of the same columns: path.csv
(step,t_ms,robot_x,robot_y,ped_x,ped_y), distance.csv
(step,t_ms,dist_cm) and arm_flag.csv (step,t_ms,arm_reacting).

The metrics file is JSON with a ``config`` echo (enough to recompute
the metrics from the trace) and a ``metrics`` object.  All writers are
deterministic: equal runs produce byte-identical files.
"""

from __future__ import annotations

import json
from pathlib import Path

from .arm import ArmState
from .engine import Pose, SafetyMetrics, SimConfig, TraceRecord
from .kinematics import BaseGeometry, hex_directions
from .policies import PolicyCommand
from .sensors import Obstacle, SensorReading

CSV_HEADER = "step,t_ms,robot_x,robot_y,ped_x,ped_y,dist_cm,arm_reacting,s1,s2,s3,s4,s5,s6"


def record_to_dict(rec: TraceRecord) -> dict:
    return {
        "step": rec.step_index,
        "t_ms": rec.t_ms,
        "robot": {"x": rec.robot.x, "y": rec.robot.y, "heading": rec.robot.heading},
        "pedestrians": [
            {"x": p.x, "y": p.y, "radius": p.radius} for p in rec.pedestrians
        ],
        "readings": [r.range_cm for r in rec.readings],
        "arm": {
            "servo1": rec.arm_state.servo1,
            "servo2": rec.arm_state.servo2,
            "reacting": rec.arm_state.reacting,
        },
        "command": {
            "arm": None
            if rec.command.arm is None
            else {"servo1": rec.command.arm.servo1, "servo2": rec.command.arm.servo2},
            "base": None if rec.command.base is None else rec.command.base.label,
        },
        "dist_cm": rec.center_distance_cm,
    }


def record_from_dict(d: dict, geometry: BaseGeometry = BaseGeometry()) -> TraceRecord:
    hexes = {h.label: h for h in hex_directions(geometry)}
    cmd_arm = d["command"]["arm"]
    cmd_base = d["command"]["base"]
    return TraceRecord(
        step_index=d["step"],
        t_ms=d["t_ms"],
        robot=Pose(d["robot"]["x"], d["robot"]["y"], d["robot"]["heading"]),
        pedestrians=tuple(
            Obstacle(p["x"], p["y"], p["radius"]) for p in d["pedestrians"]
        ),
        readings=tuple(
            SensorReading(i + 1, v) for i, v in enumerate(d["readings"])
        ),
        arm_state=ArmState(d["arm"]["servo1"], d["arm"]["servo2"]),
        command=PolicyCommand(
            arm=None if cmd_arm is None else ArmState(cmd_arm["servo1"], cmd_arm["servo2"]),
            base=None if cmd_base is None else hexes[cmd_base],
        ),
        center_distance_cm=d["dist_cm"],
    )


def trace_to_jsonl(trace: list[TraceRecord]) -> str:
    return "".join(
        json.dumps(record_to_dict(r), separators=(",", ":")) + "\n" for r in trace
    )


def write_trace_jsonl(trace: list[TraceRecord], path: str | Path) -> None:
    Path(path).write_text(trace_to_jsonl(trace))


def read_trace_jsonl(
    path: str | Path, geometry: BaseGeometry = BaseGeometry()
) -> list[TraceRecord]:
    records = []
    for line in Path(path).read_text().splitlines():
        if line.strip():
            records.append(record_from_dict(json.loads(line), geometry))
    return records


def _num(v: float) -> str:
    return repr(float(v))


def _csv_row(rec: TraceRecord) -> str:
    ped = rec.pedestrians[0] if rec.pedestrians else None
    cells = [
        str(rec.step_index),
        str(rec.t_ms),
        _num(rec.robot.x),
        _num(rec.robot.y),
        _num(ped.x) if ped else "",
        _num(ped.y) if ped else "",
        _num(rec.center_distance_cm),
        "1" if rec.arm_state.reacting else "0",
    ]
    cells += ["" if r.range_cm is None else _num(r.range_cm) for r in rec.readings]
    return ",".join(cells)


def write_trace_csv(trace: list[TraceRecord], path: str | Path) -> None:
    lines = [CSV_HEADER] + [_csv_row(r) for r in trace]
    Path(path).write_text("\n".join(lines) + "\n")


def write_plot_data(trace: list[TraceRecord], out_dir: str | Path) -> list[Path]:
    """Emit the three plot-ready projections; returns the paths written."""
    out = Path(out_dir)
    path_lines = ["step,t_ms,robot_x,robot_y,ped_x,ped_y"]
    dist_lines = ["step,t_ms,dist_cm"]
    flag_lines = ["step,t_ms,arm_reacting"]
    for r in trace:
        ped = r.pedestrians[0] if r.pedestrians else None
        px = _num(ped.x) if ped else ""
        py = _num(ped.y) if ped else ""
        path_lines.append(
            f"{r.step_index},{r.t_ms},{_num(r.robot.x)},{_num(r.robot.y)},{px},{py}"
        )
        dist_lines.append(f"{r.step_index},{r.t_ms},{_num(r.center_distance_cm)}")
        flag_lines.append(
            f"{r.step_index},{r.t_ms},{'1' if r.arm_state.reacting else '0'}"
        )
    written = []
    for name, lines in [
        ("path.csv", path_lines),
        ("distance.csv", dist_lines),
        ("arm_flag.csv", flag_lines),
    ]:
        p = out / name
        p.write_text("\n".join(lines) + "\n")
        written.append(p)
    return written


def metrics_to_dict(metrics: SafetyMetrics) -> dict:
    return {
        "min_distance_cm": metrics.min_distance_cm,
        "unsafe_dwell_ms": metrics.unsafe_dwell_ms,
        "missed_detections": metrics.missed_detections,
        "violations": metrics.violations,
    }


def metrics_from_dict(d: dict) -> SafetyMetrics:
    return SafetyMetrics(
        min_distance_cm=d["min_distance_cm"],
        unsafe_dwell_ms=d["unsafe_dwell_ms"],
        missed_detections=d["missed_detections"],
        violations=d["violations"],
    )


def write_metrics_json(
    metrics: SafetyMetrics, cfg: SimConfig, extra: dict, path: str | Path
) -> None:
    payload = {
        "config": {
            "dt_ms": cfg.dt_ms,
            "base_speed_cm_per_ms": cfg.base_speed_cm_per_ms,
            "safe_distance_cm": cfg.safety.safe_distance,
            "body_diameter_cm": cfg.geometry.body_diameter,
            "wheel_position_angles_deg": list(cfg.geometry.wheel_position_angles),
            "sensor_min_range_cm": cfg.sensors.min_range,
            "sensor_max_range_cm": cfg.sensors.max_range,
            "seed": cfg.seed,
            **extra,
        },
        "metrics": metrics_to_dict(metrics),
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def read_metrics_json(path: str | Path) -> tuple[dict, SafetyMetrics]:
    payload = json.loads(Path(path).read_text())
    return payload["config"], metrics_from_dict(payload["metrics"])
