"""Kinematics of a three-omni-wheel base.

Frames and conventions
----------------------
The base frame has +x pointing out the front of the platform (range
sensor 1's axis) and +y to the left; angles are measured CCW from +x in
degrees unless noted.  The three wheels sit on a circle of radius
``wheel_offset_radius`` at position angles 120 deg apart and drive
tangentially, so a wheel's signed rim speed obeys the rolling constraint

    v_i = -sin(a_i) * vx + cos(a_i) * vy + R * omega

for wheel position angle ``a_i``.  The kinematic matrix is built from
these constraints rather than transcribed from any fixed numeric form,
which keeps it valid for every wheel placement.

Driving two wheels in opposition with the third idle translates the base
along one of six straight-line directions 60 deg apart, labelled
+N/-N/+M/-M/+L/-L.  The label frame is anchored to wheel 1: the
(0, +1, -1) pattern translates along +N.  With the default wheel
placement (wheel 1 at 180 deg) +N coincides with the base's front, so
sensor axes and drive directions line up; placing wheel 1 at 210 deg
instead puts the sensor axes on the bisectors between drive directions.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

# Wheel-speed sign patterns for the six straight-line drive moves: two
# wheels counter-rotate, the third idles and slides on its rollers.
DRIVE_PATTERNS: dict[str, tuple[int, int, int]] = {
    "+N": (0, 1, -1),
    "-N": (0, -1, 1),
    "-M": (1, -1, 0),
    "+M": (-1, 1, 0),
    "+L": (1, 0, -1),
    "-L": (-1, 0, 1),
}

# Hex labels in CCW order starting from +N.
_HEX_LABELS_CCW = ("+N", "+M", "-L", "-N", "-M", "+L")


@dataclass(frozen=True)
class BaseGeometry:
    """Physical layout of the wheel base (lengths in cm, angles in deg)."""

    wheel_offset_radius: float = 25.0
    wheel_radius: float = 5.0  # carried for completeness; rim speeds absorb it
    body_diameter: float = 50.0
    wheel_position_angles: tuple[float, float, float] = (180.0, 300.0, 60.0)

    def __post_init__(self) -> None:
        if not (self.wheel_offset_radius > 0 and self.wheel_radius > 0 and self.body_diameter > 0):
            raise ValueError("geometry lengths must be positive")
        a1, a2, a3 = self.wheel_position_angles
        if abs((a2 - a1) % 360.0 - 120.0) > 1e-9 or abs((a3 - a2) % 360.0 - 120.0) > 1e-9:
            raise ValueError("wheel position angles must be 120 deg apart (CCW)")


@dataclass(frozen=True)
class WheelSpeeds:
    """Signed linear rim speeds of the three wheels, cm/s."""

    v1: float
    v2: float
    v3: float

    def __post_init__(self) -> None:
        if not all(math.isfinite(v) for v in (self.v1, self.v2, self.v3)):
            raise ValueError("wheel speeds must be finite")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.v1, self.v2, self.v3)


@dataclass(frozen=True)
class BodyVelocity:
    """Planar twist of the base: vx, vy in cm/s, omega in rad/s."""

    vx: float
    vy: float
    omega: float

    def __post_init__(self) -> None:
        if not all(math.isfinite(v) for v in (self.vx, self.vy, self.omega)):
            raise ValueError("body velocity components must be finite")


@dataclass(frozen=True)
class HexDirection:
    """One of the six straight-line drive directions, as a base-frame unit vector."""

    label: str
    unit_vector: tuple[float, float]


@dataclass(frozen=True)
class CalibrationSample:
    """One timed straight-line run: drive duration and measured displacement."""

    dt_ms: float
    dd_cm: float

    def __post_init__(self) -> None:
        if not (self.dt_ms > 0):
            raise ValueError("sample duration must be positive")
        if not (self.dd_cm >= 0):
            raise ValueError("sample displacement must be non-negative")


@lru_cache(maxsize=None)
def _wheel_matrix(geometry: BaseGeometry) -> np.ndarray:
    """Rolling-constraint matrix mapping (vx, vy, omega) to rim speeds."""
    rows = []
    for a_deg in geometry.wheel_position_angles:
        a = math.radians(a_deg)
        rows.append([-math.sin(a), math.cos(a), geometry.wheel_offset_radius])
    return np.array(rows)


@lru_cache(maxsize=None)
def _body_matrix(geometry: BaseGeometry) -> np.ndarray:
    """Inverse of the rolling-constraint matrix; always exists for 120 deg spacing."""
    return np.linalg.inv(_wheel_matrix(geometry))


def forward_kinematics(w: WheelSpeeds, geometry: BaseGeometry = BaseGeometry()) -> BodyVelocity:
    """Body twist induced by the given rim speeds.

    Solves the three rolling constraints for (vx, vy, omega); the
    resulting map is linear, so scaling or negating the wheel speeds
    scales or negates the twist.
    """
    vx, vy, omega = _body_matrix(geometry) @ w.as_tuple()
    return BodyVelocity(float(vx), float(vy), float(omega))


def inverse_kinematics(b: BodyVelocity, geometry: BaseGeometry = BaseGeometry()) -> WheelSpeeds:
    """Rim speeds that realize the given body twist (exact rolling constraints)."""
    v1, v2, v3 = _wheel_matrix(geometry) @ (b.vx, b.vy, b.omega)
    return WheelSpeeds(float(v1), float(v2), float(v3))


def hex_directions(geometry: BaseGeometry = BaseGeometry()) -> tuple[HexDirection, ...]:
    """The six drive directions for this wheel placement, CCW from +N.

    Opposite labels are exact negations by construction.
    """
    base_deg = (geometry.wheel_position_angles[0] + 180.0) % 360.0
    first_three = []
    for k in range(3):
        a = math.radians((base_deg + 60.0 * k) % 360.0)
        first_three.append((math.cos(a), math.sin(a)))
    vectors = first_three + [(-ux, -uy) for ux, uy in first_three]
    return tuple(
        HexDirection(label, vec) for label, vec in zip(_HEX_LABELS_CCW, vectors)
    )


def _angle_between(ux: float, uy: float, vx: float, vy: float) -> float:
    """Unsigned angle in degrees between two non-zero vectors."""
    dot = ux * vx + uy * vy
    cross = ux * vy - uy * vx
    return abs(math.degrees(math.atan2(cross, dot)))


def hex_direction_for_pattern(
    w: WheelSpeeds, geometry: BaseGeometry = BaseGeometry()
) -> HexDirection | None:
    """Drive-direction label for a wheel-speed pattern, or None.

    Returns the direction whose unit vector lies within 1 deg of the
    translation produced by ``w``; patterns that rotate the base or do
    not translate at all match nothing.
    """
    b = forward_kinematics(w, geometry)
    speed = math.hypot(b.vx, b.vy)
    if speed < 1e-12:
        return None
    if abs(b.omega) * geometry.wheel_offset_radius > 1e-9 * speed:
        return None
    best = min(
        hex_directions(geometry),
        key=lambda h: _angle_between(b.vx, b.vy, *h.unit_vector),
    )
    if _angle_between(b.vx, b.vy, *best.unit_vector) > 1.0:
        return None
    return best


def calibrate_speed(samples: list[CalibrationSample]) -> float:
    """Mean straight-line speed over timed runs, cm/ms.

    Arithmetic mean of dd/dt per sample; raises ValueError on an empty
    sample list.
    """
    if not samples:
        raise ValueError("at least one calibration sample is required")
    return sum(s.dd_cm / s.dt_ms for s in samples) / len(samples)


class CalibrationFormatError(ValueError):
    """Malformed calibration CSV; carries the 1-based offending line number."""

    def __init__(self, line: int, message: str) -> None:
        super().__init__(f"line {line}: {message}")
        self.line = line


def load_calibration_samples(path: str | Path) -> list[CalibrationSample]:
    """Read calibration samples from a CSV file with header ``dt_ms,dd_cm``."""
    samples = []
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or [c.strip() for c in header] != ["dt_ms", "dd_cm"]:
            raise CalibrationFormatError(1, "expected header 'dt_ms,dd_cm'")
        for line, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise CalibrationFormatError(line, f"expected 2 columns, got {len(row)}")
            try:
                dt, dd = float(row[0]), float(row[1])
            except ValueError:
                raise CalibrationFormatError(line, f"non-numeric value in {row!r}") from None
            try:
                samples.append(CalibrationSample(dt, dd))
            except ValueError as exc:
                raise CalibrationFormatError(line, str(exc)) from None
    if not samples:
        raise CalibrationFormatError(2, "no data rows")
    return samples
