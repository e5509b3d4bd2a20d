"""Deterministic fixed-step world simulation.

Each step advances the world by ``dt_ms`` in a fixed substep order:

1. pedestrians move to their scripted/steered positions for t + dt;
2. the sensors fire against the new pedestrian positions from the
   robot's current pose;
3. the active policy turns readings into a command;
4. the arm settles toward the commanded posture (neutral when no arm
   target), honoring the optional slew limit;
5. the base translates at the calibrated speed along the commanded hex
   direction for dt (stationary when no base command); heading is
   never changed by the shipped policies;
6. a trace record is emitted reflecting the post-step world.

Identical inputs produce bit-identical traces: there is no wall-clock
or unseeded randomness anywhere in the loop.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

from .arm import ArmGeometry, ArmState, apply_slew, default_pose
from .kinematics import BaseGeometry
from .policies import PolicyCommand, PolicyState, SafetyConfig
from .sensors import Obstacle, SensorConfig, SensorReading, sense_all

PolicyFn = Callable[
    [tuple[SensorReading, ...], PolicyState], tuple[PolicyCommand, PolicyState]
]


class Pose(NamedTuple):
    x: float
    y: float
    heading: float  # rad


@dataclass(frozen=True)
class SimConfig:
    """Everything a run needs besides the pedestrian inputs."""

    dt_ms: int = 50
    base_speed_cm_per_ms: float = 0.02  # calibrated straight-line speed
    geometry: BaseGeometry = field(default_factory=BaseGeometry)
    sensors: SensorConfig = field(default_factory=SensorConfig)
    safety: SafetyConfig = field(default_factory=SafetyConfig)
    arm: ArmGeometry = field(default_factory=ArmGeometry)
    arm_slew_deg_per_step: float | None = None
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.dt_ms <= 0:
            raise ValueError("dt must be positive")
        if self.base_speed_cm_per_ms < 0:
            raise ValueError("base speed must be non-negative")
        self.safety.check_against(self.sensors)

    @property
    def robot_radius(self) -> float:
        return self.geometry.body_diameter / 2.0

    def make_rng(self) -> random.Random | None:
        if self.sensors.noise_amplitude > 0:
            return random.Random(self.seed)
        return None


@dataclass(frozen=True)
class WorldState:
    """The single stepped state: everything the next step depends on."""

    t_ms: int
    step_index: int
    robot: Pose
    arm_state: ArmState
    policy_state: PolicyState
    pedestrians: tuple[Obstacle, ...]


@dataclass(frozen=True)
class TraceRecord:
    """One immutable per-step log entry; all metrics and plots derive from these."""

    step_index: int
    t_ms: int
    robot: Pose
    pedestrians: tuple[Obstacle, ...]
    readings: tuple[SensorReading, ...]
    arm_state: ArmState
    command: PolicyCommand
    center_distance_cm: float


@dataclass(frozen=True)
class SafetyMetrics:
    """Run-level safety summary.

    ``violations`` counts contact episodes: transitions into
    center-distance <= robot radius + pedestrian radius.
    ``missed_detections`` counts steps where a pedestrian sits inside
    the safe distance yet no sensor reading falls below it.
    """

    min_distance_cm: float | None
    unsafe_dwell_ms: int
    missed_detections: int
    violations: int


class ScriptCoverageError(ValueError):
    """A pedestrian script does not span the simulated interval."""


@dataclass(frozen=True)
class PedestrianScript:
    """Piecewise-linear waypoint track: (t_ms, x_cm, y_cm) tuples."""

    waypoints: tuple[tuple[float, float, float], ...]

    def __post_init__(self) -> None:
        if not self.waypoints:
            raise ValueError("a script needs at least one waypoint")
        times = [w[0] for w in self.waypoints]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("waypoint times must be strictly increasing")
        if not all(math.isfinite(v) for w in self.waypoints for v in w):
            raise ValueError("waypoints must be finite")

    def covers(self, t0_ms: float, t1_ms: float) -> bool:
        return self.waypoints[0][0] <= t0_ms and self.waypoints[-1][0] >= t1_ms

    def position_at(self, t_ms: float) -> tuple[float, float]:
        """Exact at waypoints, linear between them; errors outside the span."""
        pts = self.waypoints
        if t_ms < pts[0][0] or t_ms > pts[-1][0]:
            raise ScriptCoverageError(f"t={t_ms} ms outside scripted span")
        for (t0, x0, y0), (t1, x1, y1) in zip(pts, pts[1:]):
            if t_ms == t0:
                return (x0, y0)
            if t0 < t_ms < t1:
                f = (t_ms - t0) / (t1 - t0)
                return (x0 + f * (x1 - x0), y0 + f * (y1 - y0))
        return (pts[-1][1], pts[-1][2])


def initial_world(
    robot: Pose, pedestrians: tuple[Obstacle, ...] | list[Obstacle]
) -> WorldState:
    return WorldState(
        t_ms=0,
        step_index=0,
        robot=robot,
        arm_state=default_pose(),
        policy_state=PolicyState(),
        pedestrians=tuple(pedestrians),
    )


def center_distance(robot: Pose, pedestrians: tuple[Obstacle, ...]) -> float:
    """Centre-to-centre distance to the nearest pedestrian; inf when none."""
    if not pedestrians:
        return math.inf
    return min(math.hypot(p.x - robot.x, p.y - robot.y) for p in pedestrians)


def step(
    world: WorldState,
    ped_positions: list[tuple[float, float]],
    policy: PolicyFn,
    cfg: SimConfig,
    rng: random.Random | None = None,
) -> tuple[WorldState, TraceRecord]:
    """Advance one fixed timestep; see the module docstring for the substep order."""
    if len(ped_positions) != len(world.pedestrians):
        raise ValueError("one position per pedestrian is required")
    peds = tuple(
        Obstacle(x, y, old.radius)
        for (x, y), old in zip(ped_positions, world.pedestrians)
    )
    readings = sense_all((world.robot.x, world.robot.y, world.robot.heading), peds, cfg.sensors, rng)
    command, policy_state = policy(readings, world.policy_state)
    target = command.arm if command.arm is not None else default_pose()
    arm_state = apply_slew(world.arm_state, target, cfg.arm_slew_deg_per_step)
    if command.base is not None:
        ux, uy = command.base.unit_vector
        c, s = math.cos(world.robot.heading), math.sin(world.robot.heading)
        dist = cfg.base_speed_cm_per_ms * cfg.dt_ms
        robot = Pose(
            world.robot.x + (c * ux - s * uy) * dist,
            world.robot.y + (s * ux + c * uy) * dist,
            world.robot.heading,
        )
    else:
        robot = world.robot
    new_world = WorldState(
        t_ms=world.t_ms + cfg.dt_ms,
        step_index=world.step_index + 1,
        robot=robot,
        arm_state=arm_state,
        policy_state=policy_state,
        pedestrians=peds,
    )
    record = TraceRecord(
        step_index=new_world.step_index,
        t_ms=new_world.t_ms,
        robot=robot,
        pedestrians=peds,
        readings=readings,
        arm_state=arm_state,
        command=command,
        center_distance_cm=center_distance(robot, peds),
    )
    return new_world, record


def run_scenario(
    scripts: list[PedestrianScript],
    radii: list[float],
    policy: PolicyFn,
    cfg: SimConfig,
    duration_ms: int,
    robot_start: Pose = Pose(0.0, 0.0, 0.0),
) -> tuple[list[TraceRecord], SafetyMetrics]:
    """Run scripted pedestrians against a policy for the whole duration.

    Steps ``duration_ms // dt_ms`` times; every script must span
    [0, duration].  A zero-duration run returns an empty trace and
    all-zero metrics with no minimum distance.
    """
    if len(scripts) != len(radii):
        raise ValueError("one radius per script is required")
    for s in scripts:
        if not s.covers(0, duration_ms):
            raise ScriptCoverageError(
                f"script spans [{s.waypoints[0][0]}, {s.waypoints[-1][0]}] ms, "
                f"run needs [0, {duration_ms}] ms"
            )
    peds = [
        Obstacle(*s.position_at(0), radius) for s, radius in zip(scripts, radii)
    ]
    world = initial_world(robot_start, peds)
    rng = cfg.make_rng()
    trace: list[TraceRecord] = []
    for k in range(1, duration_ms // cfg.dt_ms + 1):
        positions = [s.position_at(k * cfg.dt_ms) for s in scripts]
        world, record = step(world, positions, policy, cfg, rng)
        trace.append(record)
    if not trace:
        return [], SafetyMetrics(None, 0, 0, 0)
    return trace, compute_metrics(trace, cfg)


class MetricsAccumulator:
    """Streaming form of ``compute_metrics`` for live sessions.

    Feeding it a trace record by record yields, at every point, exactly
    what ``compute_metrics`` would report over the records so far.
    """

    def __init__(self, cfg: SimConfig) -> None:
        self._cfg = cfg
        self._min: float | None = None
        self._unsafe_steps = 0
        self._missed = 0
        self._violations = 0
        self._in_contact = False

    def add(self, r: TraceRecord) -> None:
        cfg = self._cfg
        if self._min is None or r.center_distance_cm < self._min:
            self._min = r.center_distance_cm
        if r.center_distance_cm < cfg.safety.safe_distance:
            self._unsafe_steps += 1
            seen = any(
                x.range_cm is not None and x.range_cm < cfg.safety.safe_distance
                for x in r.readings
            )
            if not seen:
                self._missed += 1
        contact = any(
            math.hypot(p.x - r.robot.x, p.y - r.robot.y) <= cfg.robot_radius + p.radius
            for p in r.pedestrians
        )
        if contact and not self._in_contact:
            self._violations += 1
        self._in_contact = contact

    def snapshot(self) -> SafetyMetrics:
        return SafetyMetrics(
            min_distance_cm=self._min,
            unsafe_dwell_ms=self._unsafe_steps * self._cfg.dt_ms,
            missed_detections=self._missed,
            violations=self._violations,
        )


def compute_metrics(trace: list[TraceRecord], cfg: SimConfig) -> SafetyMetrics:
    """Safety summary over a full trace; rejects empty traces."""
    if not trace:
        raise ValueError("cannot compute metrics over an empty trace")
    acc = MetricsAccumulator(cfg)
    for r in trace:
        acc.add(r)
    return acc.snapshot()
