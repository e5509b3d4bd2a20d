import math
import random

import pytest

from omnibench.sensors import (
    Obstacle,
    SensorConfig,
    coverage_fraction,
    sense_all,
    sensor_axis_angles,
)

CFG = SensorConfig()
ORIGIN = (0.0, 0.0, 0.0)


def wrap(a):
    return math.atan2(math.sin(a), math.cos(a))


def cone_distance_oracle(sx, sy, axis, ob, half, n=20000):
    """Brute-force nearest qualifying boundary point by dense sampling."""
    best = None
    for k in range(n):
        t = 2.0 * math.pi * k / n
        px = ob.x + ob.radius * math.cos(t)
        py = ob.y + ob.radius * math.sin(t)
        if abs(wrap(math.atan2(py - sy, px - sx) - axis)) <= half:
            d = math.hypot(px - sx, py - sy)
            if best is None or d < best:
                best = d
    return best


def sense_raw_oracle(pose, ob, cfg, sensor_id, n=20000):
    """Unquantized reading of one sensor per the sampling oracle."""
    rx, ry, heading = pose
    axis = heading + math.radians(sensor_axis_angles(cfg)[sensor_id - 1])
    sx = rx + cfg.mount_radius * math.cos(axis)
    sy = ry + cfg.mount_radius * math.sin(axis)
    return cone_distance_oracle(sx, sy, axis, ob, math.radians(cfg.beam_half_angle), n)


def test_dead_ahead_obstacle_reads_on_sensor_one_only():
    # Disc surface exactly 40 cm from sensor 1's mount point.
    ob = Obstacle(CFG.mount_radius + 50.0, 0.0, 10.0)
    oracle = sense_raw_oracle(ORIGIN, ob, CFG, 1)
    assert oracle == pytest.approx(40.0, abs=1e-3)
    readings = sense_all(ORIGIN, [ob], CFG)
    assert readings[0].range_cm == pytest.approx(math.floor(40.0 / 0.3) * 0.3, abs=1e-9)
    assert readings[0].range_cm == pytest.approx(39.9, abs=1e-9)
    for r in readings[1:]:
        assert r.range_cm is None
        assert sense_raw_oracle(ORIGIN, ob, CFG, r.sensor_id, n=4000) is None


def test_gap_bearing_obstacle_is_invisible():
    # Midway between sensors 1 and 2 the cones leave a 30 deg gap; a
    # small disc 40 cm out on that bearing answers to nobody.
    b = math.radians(30.0)
    ob = Obstacle(40.0 * math.cos(b), 40.0 * math.sin(b), 0.5)
    assert all(r.range_cm is None for r in sense_all(ORIGIN, [ob], CFG))
    # A pedestrian-sized disc parked at 45 cm on the same bearing is
    # likewise missed; this is the unsafe-area blind spot.
    ped = Obstacle(45.0 * math.cos(b), 45.0 * math.sin(b), 15.0)
    assert all(r.range_cm is None for r in sense_all(ORIGIN, [ped], CFG))
    for sid in range(1, 7):
        assert sense_raw_oracle(ORIGIN, ped, CFG, sid, n=4000) is None


def test_no_obstacles_reads_out_of_range_everywhere():
    readings = sense_all(ORIGIN, [], CFG)
    assert len(readings) == 6
    assert all(r.range_cm is None for r in readings)
    assert [r.sensor_id for r in readings] == [1, 2, 3, 4, 5, 6]


def test_analytic_cone_distance_matches_sampling_oracle():
    rng = random.Random(21)
    half = math.radians(CFG.beam_half_angle)
    checked = 0
    for _ in range(150):
        pose = (rng.uniform(-20, 20), rng.uniform(-20, 20), rng.uniform(-math.pi, math.pi))
        sid = rng.randint(1, 6)
        rx, ry, heading = pose
        axis = heading + math.radians(sensor_axis_angles(CFG)[sid - 1])
        sx = rx + CFG.mount_radius * math.cos(axis)
        sy = ry + CFG.mount_radius * math.sin(axis)
        # Scatter around the beam so both hits and near-misses occur.
        off = math.radians(rng.uniform(-40, 40))
        dist = rng.uniform(5, 200)
        ob = Obstacle(
            sx + dist * math.cos(axis + off),
            sy + dist * math.sin(axis + off),
            rng.uniform(1.0, 30.0),
        )
        if math.hypot(ob.x - sx, ob.y - sy) <= ob.radius:
            continue  # overlap case asserted separately
        oracle = cone_distance_oracle(sx, sy, axis, ob, half - 1e-9)
        from omnibench.sensors import _cone_distance

        analytic = _cone_distance(sx, sy, axis, ob, half)
        if oracle is not None:
            assert analytic is not None
            assert analytic <= oracle + 1e-9
            assert oracle - analytic <= 0.05
            checked += 1
    assert checked > 50


def test_overlapping_obstacle_clamps_to_minimum_grid_step():
    ob = Obstacle(25.0, 0.0, 10.0)  # swallows sensor 1's mount point
    r1 = sense_all(ORIGIN, [ob], CFG)[0]
    # Smallest resolution multiple at or above min_range.
    assert r1.range_cm == pytest.approx(2.1, abs=1e-9)


def test_reading_grid_and_envelope():
    rng = random.Random(5)
    for _ in range(300):
        obs = [
            Obstacle(rng.uniform(-300, 300), rng.uniform(-300, 300), rng.uniform(0.5, 40.0))
            for _ in range(rng.randint(1, 4))
        ]
        pose = (rng.uniform(-50, 50), rng.uniform(-50, 50), rng.uniform(-math.pi, math.pi))
        for r in sense_all(pose, obs, CFG):
            if r.range_cm is None:
                continue
            assert CFG.min_range <= r.range_cm <= CFG.max_range + 1e-9
            steps = r.range_cm / CFG.resolution
            assert abs(steps - round(steps)) < 1e-6


def test_rotating_robot_by_one_spacing_permutes_readings():
    rng = random.Random(9)
    for _ in range(50):
        obs = [
            Obstacle(rng.uniform(-200, 200), rng.uniform(-200, 200), rng.uniform(2.0, 25.0))
            for _ in range(2)
        ]
        base = sense_all((0.0, 0.0, 0.3), obs, CFG)
        turned = sense_all((0.0, 0.0, 0.3 + math.radians(60.0)), obs, CFG)
        for i in range(6):
            want = base[(i + 1) % 6].range_cm
            got = turned[i].range_cm
            if want is None:
                assert got is None
            else:
                assert got == pytest.approx(want, abs=1e-6)


def test_rotating_world_and_robot_together_preserves_readings():
    rng = random.Random(13)
    for _ in range(50):
        ob = Obstacle(rng.uniform(-200, 200), rng.uniform(-200, 200), rng.uniform(2.0, 25.0))
        ang = rng.uniform(-math.pi, math.pi)
        c, s = math.cos(ang), math.sin(ang)
        rotated = Obstacle(c * ob.x - s * ob.y, s * ob.x + c * ob.y, ob.radius)
        base = sense_all((0.0, 0.0, 0.0), [ob], CFG)
        moved = sense_all((0.0, 0.0, ang), [rotated], CFG)
        for a, b in zip(base, moved):
            if a.range_cm is None:
                assert b.range_cm is None
            else:
                assert b.range_cm == pytest.approx(a.range_cm, abs=1e-6)


def test_receding_obstacle_never_reads_shorter():
    rng = random.Random(17)
    tried = 0
    for _ in range(200):
        pose = ORIGIN
        sid = rng.randint(1, 6)
        axis = math.radians(sensor_axis_angles(CFG)[sid - 1])
        sx = CFG.mount_radius * math.cos(axis)
        sy = CFG.mount_radius * math.sin(axis)
        off = math.radians(rng.uniform(-20, 20))
        d0 = rng.uniform(20, 80)
        radius = rng.uniform(2, 20)
        ox = sx + d0 * math.cos(axis + off)
        oy = sy + d0 * math.sin(axis + off)
        prev = sense_all(pose, [Obstacle(ox, oy, radius)], CFG)[sid - 1].range_cm
        if prev is None:
            continue
        tried += 1
        for scale in (1.2, 1.6, 2.4, 4.0, 8.0):
            nx = sx + (ox - sx) * scale
            ny = sy + (oy - sy) * scale
            cur = sense_all(pose, [Obstacle(nx, ny, radius)], CFG)[sid - 1].range_cm
            cur_v = math.inf if cur is None else cur
            prev_v = math.inf if prev is None else prev
            assert cur_v >= prev_v - 1e-9
            prev = cur
    assert tried > 50


def test_detection_requires_bearing_inside_widened_cone():
    rng = random.Random(29)
    for _ in range(300):
        ob = Obstacle(rng.uniform(-200, 200), rng.uniform(-200, 200), rng.uniform(1.0, 30.0))
        readings = sense_all(ORIGIN, [ob], CFG)
        for r in readings:
            if r.range_cm is None:
                continue
            axis = math.radians(sensor_axis_angles(CFG)[r.sensor_id - 1])
            sx = CFG.mount_radius * math.cos(axis)
            sy = CFG.mount_radius * math.sin(axis)
            d = math.hypot(ob.x - sx, ob.y - sy)
            if d <= ob.radius:
                continue
            bearing = abs(wrap(math.atan2(ob.y - sy, ob.x - sx) - axis))
            widened = math.radians(CFG.beam_half_angle) + math.asin(min(1.0, ob.radius / d))
            assert bearing <= widened + 1e-9


def test_coverage_fraction_values():
    assert coverage_fraction(CFG) == 0.5
    assert coverage_fraction(SensorConfig(beam_half_angle=30.0)) == 1.0
    assert coverage_fraction(SensorConfig(beam_half_angle=1e-9)) == pytest.approx(0.0, abs=1e-9)


def test_noise_is_seeded_and_bounded():
    cfg = SensorConfig(noise_amplitude=1.5)
    ob = Obstacle(90.0, 0.0, 10.0)
    a = sense_all(ORIGIN, [ob], cfg, rng=random.Random(42))
    b = sense_all(ORIGIN, [ob], cfg, rng=random.Random(42))
    assert a == b
    clean = sense_all(ORIGIN, [ob], CFG)[0].range_cm
    noisy = a[0].range_cm
    assert abs(noisy - clean) <= cfg.noise_amplitude + CFG.resolution + 1e-9
    c = sense_all(ORIGIN, [ob], cfg, rng=random.Random(43))
    assert any(x.range_cm != y.range_cm for x, y in zip(a, c)) or a == c


def test_config_validation():
    with pytest.raises(ValueError):
        SensorConfig(count=5)  # 5 * 60 != 360
    with pytest.raises(ValueError):
        SensorConfig(min_range=0.0)
    with pytest.raises(ValueError):
        SensorConfig(min_range=500.0)
    with pytest.raises(ValueError):
        SensorConfig(resolution=0.0)
    with pytest.raises(ValueError):
        Obstacle(0.0, 0.0, 0.0)
