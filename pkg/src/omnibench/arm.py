"""The 2-DoF reactive arm: neutral posture, per-sensor reaction angles,
and the footprint bound on how far the tip may lean.

Servo deviations from 90 deg tilt the link about two orthogonal axes;
servo 2 leans the tip along the base's front/back axis, servo 1 along
left/right.  The per-sensor reaction table maps each stimulated sensor
to a fixed servo pair; rows 1/6 and 2/5 intentionally share angles, and
the direction word attached to each row is informational only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

NEUTRAL_DEG = 90.0

# sensor id -> (servo1, servo2, nominal lean direction)
REACTION_TABLE: dict[int, tuple[float, float, str]] = {
    1: (90.0, 45.0, "front"),
    2: (90.0, 135.0, "right"),
    3: (45.0, 90.0, "left"),
    4: (135.0, 90.0, "right"),
    5: (90.0, 135.0, "behind"),
    6: (90.0, 45.0, "left"),
}


@dataclass(frozen=True)
class ArmState:
    """Servo angles in deg; the arm counts as reacting away from (90, 90)."""

    servo1: float = NEUTRAL_DEG
    servo2: float = NEUTRAL_DEG

    def __post_init__(self) -> None:
        for v in (self.servo1, self.servo2):
            if not (0.0 <= v <= 180.0):
                raise ValueError("servo angles must lie in [0, 180] deg")

    @property
    def reacting(self) -> bool:
        return (self.servo1, self.servo2) != (NEUTRAL_DEG, NEUTRAL_DEG)


@dataclass(frozen=True)
class ArmGeometry:
    """Link length and how far the tip may lean without leaving its footprint."""

    link_length: float = 21.0  # cm
    max_bend_from_vertical: float = 45.0  # deg
    footprint_diameter: float = 30.0  # cm

    def __post_init__(self) -> None:
        reach = self.link_length * math.sin(math.radians(self.max_bend_from_vertical))
        if reach > self.footprint_diameter / 2.0 + 1e-9:
            raise ValueError("maximum bend would carry the tip outside the footprint")


def default_pose() -> ArmState:
    """Upright neutral posture."""
    return ArmState(NEUTRAL_DEG, NEUTRAL_DEG)


def react_to_sensor(sensor_id: int) -> ArmState:
    """Reaction posture for a stimulated sensor (1..6)."""
    if sensor_id not in REACTION_TABLE:
        raise ValueError(f"sensor id must be 1..6, got {sensor_id}")
    s1, s2, _ = REACTION_TABLE[sensor_id]
    return ArmState(s1, s2)


def tip_offset(state: ArmState, geom: ArmGeometry = ArmGeometry()) -> tuple[float, float]:
    """Horizontal displacement of the arm tip in the base frame, cm.

    Servo 1 tilts about the front axis (moves the tip along y), servo 2
    about the left axis (moves it along x); the second tilt rides on the
    first, gimbal style.  The neutral posture projects onto the origin.
    """
    t1 = math.radians(state.servo1 - NEUTRAL_DEG)
    t2 = math.radians(state.servo2 - NEUTRAL_DEG)
    x = geom.link_length * math.sin(t2)
    y = -geom.link_length * math.sin(t1) * math.cos(t2)
    return (x, y)


def apply_slew(
    current: ArmState, target: ArmState, max_step_deg: float | None
) -> ArmState:
    """Move toward a target posture, at most ``max_step_deg`` per servo per step.

    None disables the limit (servo settles within one step).
    """
    if max_step_deg is None:
        return target

    def toward(cur: float, tgt: float) -> float:
        delta = tgt - cur
        if abs(delta) <= max_step_deg:
            return tgt
        return cur + math.copysign(max_step_deg, delta)

    return ArmState(toward(current.servo1, target.servo1), toward(current.servo2, target.servo2))
