"""Reactive safe-interaction policies.

Both policies watch the six range readings and trigger when any valid
reading drops below the safe distance.  They differ only in which body
reacts first:

* ``alg1`` (arm-first): a fresh violation bends the arm away from the
  offending sensor; if the violation survives into the next step the
  base also starts escaping, and from then on the arm holds its latched
  reaction angle while the base keeps moving.
* ``alg2`` (base-first): a fresh violation moves the base away; on a
  persisting violation the arm additionally bends and latches while the
  base keeps escaping.

Full clearance (no reading below the safe distance for a step) resets
either policy to idle and returns the arm to its neutral posture.  The
violating sensor is chosen by lowest reading, ties broken by lowest id,
and stays latched until clearance.  Policies are pure transition
functions: state in, state out, no internal mutation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .arm import ArmState, react_to_sensor
from .kinematics import BaseGeometry, HexDirection, hex_directions
from .sensors import SensorConfig, SensorReading, sensor_axis_angles

# Escalation phases.  idle is shared; the middle and engaged phases are
# policy-specific so traces show which ladder produced them.
IDLE = "idle"
ARM_REACTED = "arm_reacted"
BASE_ENGAGED = "base_engaged"
BASE_REACTED = "base_reacted"
ARM_ENGAGED = "arm_engaged"

POLICY_NAMES = ("alg1", "alg2")


@dataclass(frozen=True)
class SafetyConfig:
    """Trigger threshold for the avoidance ladder, cm."""

    safe_distance: float = 50.0

    def __post_init__(self) -> None:
        if self.safe_distance <= 0:
            raise ValueError("safe distance must be positive")

    def check_against(self, sensors: SensorConfig) -> None:
        if not (sensors.min_range < self.safe_distance <= sensors.max_range):
            raise ValueError(
                "safe distance must exceed the sensor minimum range and "
                "not exceed its maximum range"
            )


@dataclass(frozen=True)
class PolicyState:
    """Progress marker of the escalation ladder plus the latched sensor."""

    phase: str = IDLE
    latched_sensor: int | None = None

    def __post_init__(self) -> None:
        if (self.phase == IDLE) != (self.latched_sensor is None):
            raise ValueError("a sensor is latched exactly when the phase is not idle")


@dataclass(frozen=True)
class PolicyCommand:
    """What the policy wants this step; None fields mean leave-at-rest.

    No arm target returns the arm to its neutral posture; no base
    direction keeps the base stationary.  Both None is a plain hold.
    """

    arm: ArmState | None = None
    base: HexDirection | None = None

    @property
    def is_hold(self) -> bool:
        return self.arm is None and self.base is None


def escape_direction(
    sensor_id: int,
    geometry: BaseGeometry = BaseGeometry(),
    sensors: SensorConfig = SensorConfig(),
) -> HexDirection:
    """Drive direction pointing away from a stimulated sensor.

    Picks the hex direction angularly closest to the sensor axis plus
    180 deg; with the default wheel placement the axes coincide with hex
    directions, so the escape is exactly the opposite label.  Ties (the
    bisector placement) resolve to the first match in CCW label order,
    deterministically.
    """
    axes = sensor_axis_angles(sensors)
    if not (1 <= sensor_id <= len(axes)):
        raise ValueError(f"sensor id must be 1..{len(axes)}, got {sensor_id}")
    away = math.radians(axes[sensor_id - 1] + 180.0)
    ax, ay = math.cos(away), math.sin(away)
    return max(
        hex_directions(geometry),
        key=lambda h: ax * h.unit_vector[0] + ay * h.unit_vector[1],
    )


def _worst_violation(
    readings: tuple[SensorReading, ...], safe_distance: float
) -> int | None:
    """Sensor id of the lowest reading under the threshold, or None."""
    triggered = [
        (r.range_cm, r.sensor_id)
        for r in readings
        if r.range_cm is not None and r.range_cm < safe_distance
    ]
    if not triggered:
        return None
    return min(triggered)[1]


def step_algorithm1(
    readings: tuple[SensorReading, ...],
    state: PolicyState,
    cfg: SafetyConfig = SafetyConfig(),
    geometry: BaseGeometry = BaseGeometry(),
    sensors: SensorConfig = SensorConfig(),
) -> tuple[PolicyCommand, PolicyState]:
    """Arm-first ladder: bend, then also flee if the threat persists."""
    violator = _worst_violation(readings, cfg.safe_distance)
    if violator is None:
        return PolicyCommand(), PolicyState()
    if state.phase == IDLE:
        return (
            PolicyCommand(arm=react_to_sensor(violator)),
            PolicyState(ARM_REACTED, violator),
        )
    latched = state.latched_sensor
    return (
        PolicyCommand(
            arm=react_to_sensor(latched),
            base=escape_direction(latched, geometry, sensors),
        ),
        PolicyState(BASE_ENGAGED, latched),
    )


def step_algorithm2(
    readings: tuple[SensorReading, ...],
    state: PolicyState,
    cfg: SafetyConfig = SafetyConfig(),
    geometry: BaseGeometry = BaseGeometry(),
    sensors: SensorConfig = SensorConfig(),
) -> tuple[PolicyCommand, PolicyState]:
    """Base-first ladder: flee, then also bend if the threat persists."""
    violator = _worst_violation(readings, cfg.safe_distance)
    if violator is None:
        return PolicyCommand(), PolicyState()
    if state.phase == IDLE:
        return (
            PolicyCommand(base=escape_direction(violator, geometry, sensors)),
            PolicyState(BASE_REACTED, violator),
        )
    latched = state.latched_sensor
    return (
        PolicyCommand(
            arm=react_to_sensor(latched),
            base=escape_direction(latched, geometry, sensors),
        ),
        PolicyState(ARM_ENGAGED, latched),
    )


_STEPPERS = {"alg1": step_algorithm1, "alg2": step_algorithm2}


def make_policy(
    name: str,
    cfg: SafetyConfig = SafetyConfig(),
    geometry: BaseGeometry = BaseGeometry(),
    sensors: SensorConfig = SensorConfig(),
):
    """Bind a named policy to its configuration.

    Returns a transition function (readings, state) -> (command, state).
    """
    try:
        stepper = _STEPPERS[name]
    except KeyError:
        raise ValueError(f"unknown policy {name!r}; choose from {POLICY_NAMES}") from None

    def policy(readings, state):
        return stepper(readings, state, cfg, geometry, sensors)

    policy.name = name
    return policy
