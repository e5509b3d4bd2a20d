"""Scenario files: human-editable run descriptions.

TOML is the native format (comments welcome); a structurally identical
JSON document is accepted interchangeably.  Schema::

    name = "steady-approach"        # optional, defaults to the file stem
    policy = "alg1"                 # alg1 | alg2
    dt_ms = 50
    duration_ms = 10000
    seed = 0                        # optional; feeds sensor noise only

    [robot]                         # optional, defaults to the origin
    x = 0.0
    y = 0.0
    heading_deg = 0.0

    [safety]                        # optional
    safe_distance_cm = 50.0

    [base]                          # optional geometry overrides
    wheel_offset_radius_cm = 25.0
    body_diameter_cm = 50.0
    wheel_position_angles_deg = [180.0, 300.0, 60.0]

    [sensors]                       # optional overrides
    mount_radius_cm = 25.0
    beam_half_angle_deg = 15.0
    min_range_cm = 2.0
    max_range_cm = 400.0
    resolution_cm = 0.3
    noise_amplitude_cm = 0.0

    [arm]                           # optional
    slew_deg_per_step = 0.0         # 0 disables the slew limit

    [[pedestrians]]                 # one or more
    radius_cm = 15.0
    waypoints = [[0, 250.0, 0.0], [5000, 70.0, 0.0]]   # [t_ms, x, y]

Every pedestrian script must span [0, duration_ms].
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .engine import PedestrianScript, Pose, SimConfig
from .kinematics import BaseGeometry
from .policies import POLICY_NAMES, SafetyConfig
from .sensors import SensorConfig


class ScenarioError(ValueError):
    """Scenario file is missing, malformed, or inconsistent."""


class UnknownPolicyError(ScenarioError):
    pass


class ScriptMismatchError(ScenarioError):
    """A pedestrian script does not span the configured duration."""


@dataclass(frozen=True)
class Scenario:
    name: str
    policy: str
    duration_ms: int
    config: SimConfig
    robot_start: Pose
    scripts: tuple[PedestrianScript, ...]
    radii: tuple[float, ...]


def _parse_document(path: Path) -> dict:
    raw = path.read_bytes()
    if path.suffix.lower() == ".json":
        try:
            return json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"{path}: invalid JSON: {exc}") from None
    try:
        return tomllib.loads(raw.decode())
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise ScenarioError(f"{path}: invalid TOML: {exc}") from None


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    doc = _parse_document(path)
    try:
        return scenario_from_dict(doc, default_name=path.stem)
    except (UnknownPolicyError, ScriptMismatchError):
        raise
    except ScenarioError as exc:
        raise ScenarioError(f"{path}: {exc}") from None


def scenario_from_dict(doc: dict, default_name: str = "scenario") -> Scenario:
    policy = doc.get("policy", "alg1")
    if policy not in POLICY_NAMES:
        raise UnknownPolicyError(f"unknown policy {policy!r}; choose from {POLICY_NAMES}")

    base = doc.get("base", {})
    sensors = doc.get("sensors", {})
    safety = doc.get("safety", {})
    arm = doc.get("arm", {})
    try:
        geometry_kwargs = {}
        if "wheel_offset_radius_cm" in base:
            geometry_kwargs["wheel_offset_radius"] = float(base["wheel_offset_radius_cm"])
        if "body_diameter_cm" in base:
            geometry_kwargs["body_diameter"] = float(base["body_diameter_cm"])
        if "wheel_position_angles_deg" in base:
            geometry_kwargs["wheel_position_angles"] = tuple(
                float(a) for a in base["wheel_position_angles_deg"]
            )
        sensor_kwargs = {}
        for key, field in [
            ("mount_radius_cm", "mount_radius"),
            ("beam_half_angle_deg", "beam_half_angle"),
            ("min_range_cm", "min_range"),
            ("max_range_cm", "max_range"),
            ("resolution_cm", "resolution"),
            ("noise_amplitude_cm", "noise_amplitude"),
        ]:
            if key in sensors:
                sensor_kwargs[field] = float(sensors[key])
        slew = float(arm.get("slew_deg_per_step", 0.0)) or None
        cfg = SimConfig(
            dt_ms=int(doc.get("dt_ms", 50)),
            base_speed_cm_per_ms=float(doc.get("base_speed_cm_per_ms", 0.02)),
            geometry=BaseGeometry(**geometry_kwargs),
            sensors=SensorConfig(**sensor_kwargs),
            safety=SafetyConfig(float(safety.get("safe_distance_cm", 50.0))),
            arm_slew_deg_per_step=slew,
            seed=int(doc["seed"]) if "seed" in doc and doc["seed"] is not None else None,
        )
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"bad configuration: {exc}") from None

    robot = doc.get("robot", {})
    start = Pose(
        float(robot.get("x", 0.0)),
        float(robot.get("y", 0.0)),
        math.radians(float(robot.get("heading_deg", 0.0))),
    )

    duration = doc.get("duration_ms")
    if duration is None:
        raise ScenarioError("duration_ms is required")
    duration = int(duration)
    if duration < 0:
        raise ScenarioError("duration_ms must be non-negative")

    peds = doc.get("pedestrians", [])
    if not isinstance(peds, list) or not peds:
        raise ScenarioError("at least one [[pedestrians]] entry is required")
    scripts, radii = [], []
    for i, ped in enumerate(peds, start=1):
        try:
            waypoints = tuple(
                (float(t), float(x), float(y)) for t, x, y in ped["waypoints"]
            )
            script = PedestrianScript(waypoints)
            radius = float(ped.get("radius_cm", 15.0))
            if radius <= 0:
                raise ValueError("radius must be positive")
        except (KeyError, TypeError, ValueError) as exc:
            raise ScenarioError(f"pedestrian {i}: {exc}") from None
        if not script.covers(0, duration):
            raise ScriptMismatchError(
                f"pedestrian {i}: waypoints span "
                f"[{waypoints[0][0]:g}, {waypoints[-1][0]:g}] ms "
                f"but the run needs [0, {duration}] ms"
            )
        scripts.append(script)
        radii.append(radius)

    return Scenario(
        name=str(doc.get("name", default_name)),
        policy=policy,
        duration_ms=duration,
        config=cfg,
        robot_start=start,
        scripts=tuple(scripts),
        radii=tuple(radii),
    )
