"""Cone-beam range sensing against disc obstacles.

Six rangefinders sit on the rim of the base, 60 deg apart, each looking
radially outward with a +/-15 deg beam cone.  Sensor 1's axis defines
the base frame's front (+x); sensor i's axis is at (i-1) * 60 deg CCW
from it.  A disc obstacle registers on a sensor when any point of its
boundary lies inside the beam cone; the reported range is the distance
from the sensor mount to the nearest such boundary point, rounded down
to the resolution grid (the conservative direction for avoidance).
Readings below the minimum range clamp up to the smallest grid multiple
at or above it; anything beyond the maximum range reads as no echo.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass


@dataclass(frozen=True)
class SensorConfig:
    """Rangefinder pack layout and measurement envelope (cm / deg)."""

    count: int = 6
    mount_radius: float = 25.0
    angular_spacing: float = 60.0
    beam_half_angle: float = 15.0
    min_range: float = 2.0
    max_range: float = 400.0
    resolution: float = 0.3
    noise_amplitude: float = 0.0  # uniform +/- noise on the echo distance, cm

    def __post_init__(self) -> None:
        if abs(self.count * self.angular_spacing - 360.0) > 1e-9:
            raise ValueError("sensor axes must cover the full circle")
        if not (0 < self.min_range < self.max_range):
            raise ValueError("require 0 < min_range < max_range")
        if self.resolution <= 0 or self.beam_half_angle <= 0:
            raise ValueError("resolution and beam half-angle must be positive")
        if self.noise_amplitude < 0:
            raise ValueError("noise amplitude must be non-negative")


@dataclass(frozen=True)
class SensorReading:
    """One sensor's echo distance in cm; None when nothing answered."""

    sensor_id: int
    range_cm: float | None

    @property
    def in_range(self) -> bool:
        return self.range_cm is not None


@dataclass(frozen=True)
class Obstacle:
    """Disc obstacle in the world frame (pedestrians are discs)."""

    x: float
    y: float
    radius: float

    def __post_init__(self) -> None:
        if self.radius <= 0:
            raise ValueError("obstacle radius must be positive")


def sensor_axis_angles(cfg: SensorConfig = SensorConfig()) -> tuple[float, ...]:
    """Base-frame axis angle of each sensor in deg, sensor 1 first."""
    return tuple(i * cfg.angular_spacing for i in range(cfg.count))


def coverage_fraction(cfg: SensorConfig = SensorConfig()) -> float:
    """Fraction of the 360 deg surround inside some beam cone."""
    return min(1.0, cfg.count * 2.0 * cfg.beam_half_angle / 360.0)


def _wrap_angle(a: float) -> float:
    """Wrap to (-pi, pi]."""
    return math.atan2(math.sin(a), math.cos(a))


def _cone_distance(
    sx: float, sy: float, axis: float, ob: Obstacle, half_angle: float
) -> float | None:
    """Distance from (sx, sy) to the nearest disc-boundary point inside the cone.

    None when no boundary point lies within +/-half_angle of the axis.
    The sensor sitting inside the disc counts as contact at distance 0.
    """
    dx, dy = ob.x - sx, ob.y - sy
    d = math.hypot(dx, dy)
    if d <= ob.radius:
        return 0.0
    bearing = abs(_wrap_angle(math.atan2(dy, dx) - axis))
    if bearing <= half_angle:
        # Nearest disc point lies along the centre line, inside the cone.
        return d - ob.radius
    half_width = math.asin(min(1.0, ob.radius / d))
    if bearing > half_angle + half_width:
        return None
    # Nearest qualifying point sits on the cone-edge ray closest to the disc.
    off = bearing - half_angle
    chord = ob.radius * ob.radius - (d * math.sin(off)) ** 2
    return d * math.cos(off) - math.sqrt(max(0.0, chord))


def _quantize(raw: float, cfg: SensorConfig) -> float | None:
    if raw > cfg.max_range:
        return None
    raw = max(raw, cfg.min_range)
    q = math.floor(raw / cfg.resolution + 1e-9) * cfg.resolution
    if q < cfg.min_range:
        q = math.ceil(cfg.min_range / cfg.resolution - 1e-9) * cfg.resolution
    return q


def sense_all(
    robot_pose: tuple[float, float, float],
    obstacles: list[Obstacle] | tuple[Obstacle, ...],
    cfg: SensorConfig = SensorConfig(),
    rng: random.Random | None = None,
) -> tuple[SensorReading, ...]:
    """Range readings of every sensor for the given world.

    ``robot_pose`` is (x, y, heading_rad).  Each sensor reports the
    nearest insonified obstacle surface in its cone, or no echo.  When
    ``cfg.noise_amplitude`` is positive and an ``rng`` is supplied, a
    uniform perturbation is added to each echo before quantization.
    """
    rx, ry, heading = robot_pose
    half = math.radians(cfg.beam_half_angle)
    readings = []
    for i, axis_deg in enumerate(sensor_axis_angles(cfg), start=1):
        axis = heading + math.radians(axis_deg)
        sx = rx + cfg.mount_radius * math.cos(axis)
        sy = ry + cfg.mount_radius * math.sin(axis)
        best: float | None = None
        for ob in obstacles:
            dist = _cone_distance(sx, sy, axis, ob, half)
            if dist is not None and (best is None or dist < best):
                best = dist
        if best is None:
            readings.append(SensorReading(i, None))
            continue
        if cfg.noise_amplitude > 0 and rng is not None:
            best += rng.uniform(-cfg.noise_amplitude, cfg.noise_amplitude)
            best = max(0.0, best)
        readings.append(SensorReading(i, _quantize(best, cfg)))
    return tuple(readings)
