import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from omnibench.kinematics import (
    DRIVE_PATTERNS,
    BaseGeometry,
    BodyVelocity,
    CalibrationFormatError,
    CalibrationSample,
    WheelSpeeds,
    calibrate_speed,
    forward_kinematics,
    hex_direction_for_pattern,
    hex_directions,
    inverse_kinematics,
    load_calibration_samples,
)

GEOM = BaseGeometry()

# Timed straight-line runs used for speed calibration: (dt_ms, dd_cm).
SPEED_TRIALS = [
    (2000, 38.0), (2000, 38.5), (2000, 40.0),
    (2500, 50.5), (2500, 50.0), (2500, 50.5),
    (3000, 59.5), (3000, 59.0), (3000, 59.5),
    (5500, 110.5), (5500, 111.0), (5500, 111.0),
]


def fk_oracle(v1, v2, v3, geometry=GEOM):
    """Closed-form forward kinematics via column orthogonality.

    For 120-deg-spaced wheels the constraint matrix has mutually
    orthogonal columns, so the solve reduces to projections:
      vx = -(2/3) sum(sin a_i * v_i), vy = (2/3) sum(cos a_i * v_i),
      omega = sum(v_i) / (3 R).
    Independent of the matrix inversion used by the implementation.
    """
    angles = [math.radians(a) for a in geometry.wheel_position_angles]
    speeds = (v1, v2, v3)
    vx = -2.0 / 3.0 * sum(math.sin(a) * v for a, v in zip(angles, speeds))
    vy = 2.0 / 3.0 * sum(math.cos(a) * v for a, v in zip(angles, speeds))
    omega = sum(speeds) / (3.0 * geometry.wheel_offset_radius)
    return vx, vy, omega


def bearing_deg(vx, vy):
    return math.degrees(math.atan2(vy, vx)) % 360.0


def test_forward_kinematics_matches_orthogonality_oracle():
    rng = random.Random(7)
    for _ in range(500):
        w = WheelSpeeds(*(rng.uniform(-100, 100) for _ in range(3)))
        b = forward_kinematics(w, GEOM)
        ox, oy, oo = fk_oracle(*w.as_tuple())
        assert b.vx == pytest.approx(ox, abs=1e-9)
        assert b.vy == pytest.approx(oy, abs=1e-9)
        assert b.omega == pytest.approx(oo, abs=1e-9)


def test_zero_wheel_speeds_give_zero_twist():
    b = forward_kinematics(WheelSpeeds(0.0, 0.0, 0.0), GEOM)
    assert (b.vx, b.vy, b.omega) == (0.0, 0.0, 0.0)


def test_equal_wheel_speeds_spin_in_place():
    # Equal speeds cancel all translation terms; omega = v / R.
    v = 12.5
    b = forward_kinematics(WheelSpeeds(v, v, v), GEOM)
    assert b.vx == pytest.approx(0.0, abs=1e-12)
    assert b.vy == pytest.approx(0.0, abs=1e-12)
    assert b.omega == pytest.approx(v / GEOM.wheel_offset_radius, rel=1e-12)


def test_drive_patterns_translate_along_their_labels():
    hexes = {h.label: h for h in hex_directions(GEOM)}
    for label, pattern in DRIVE_PATTERNS.items():
        w = WheelSpeeds(*(10.0 * p for p in pattern))
        b = forward_kinematics(w, GEOM)
        assert abs(b.omega) < 1e-12, label
        ux, uy = hexes[label].unit_vector
        ang = abs((bearing_deg(b.vx, b.vy) - bearing_deg(ux, uy) + 180.0) % 360.0 - 180.0)
        assert ang < 1.0, label


def test_opposite_drive_patterns_negate_exactly():
    for label, pattern in DRIVE_PATTERNS.items():
        flipped = "-" + label[1] if label[0] == "+" else "+" + label[1]
        b = forward_kinematics(WheelSpeeds(*(float(p) for p in pattern)), GEOM)
        nb = forward_kinematics(
            WheelSpeeds(*(float(p) for p in DRIVE_PATTERNS[flipped])), GEOM
        )
        assert (nb.vx, nb.vy, nb.omega) == (-b.vx, -b.vy, -b.omega)


def test_drive_pattern_speeds_sum_to_zero_and_match_in_magnitude():
    mags = []
    for pattern in DRIVE_PATTERNS.values():
        assert sum(pattern) == 0
        b = forward_kinematics(WheelSpeeds(*(float(p) for p in pattern)), GEOM)
        mags.append(math.hypot(b.vx, b.vy))
    assert max(mags) - min(mags) < 1e-12


def test_drive_directions_are_sixty_degrees_apart():
    hexes = hex_directions(GEOM)
    for i in range(6):
        ux, uy = hexes[i].unit_vector
        vx, vy = hexes[(i + 1) % 6].unit_vector
        dot = ux * vx + uy * vy
        assert dot == pytest.approx(0.5, abs=1e-12)  # cos(60 deg)
        assert math.hypot(ux, uy) == pytest.approx(1.0, abs=1e-12)


def test_opposite_hex_labels_negate_exactly():
    hexes = {h.label: h for h in hex_directions(GEOM)}
    for axis in "NML":
        px, py = hexes["+" + axis].unit_vector
        nx, ny = hexes["-" + axis].unit_vector
        assert (nx, ny) == (-px, -py)


@settings(max_examples=200, deadline=None)
@given(
    a=st.floats(-10, 10), b=st.floats(-10, 10),
    w1=st.tuples(*[st.floats(-50, 50)] * 3),
    w2=st.tuples(*[st.floats(-50, 50)] * 3),
)
def test_forward_kinematics_is_linear(a, b, w1, w2):
    combo = WheelSpeeds(*(a * x + b * y for x, y in zip(w1, w2)))
    bc = forward_kinematics(combo, GEOM)
    b1 = forward_kinematics(WheelSpeeds(*w1), GEOM)
    b2 = forward_kinematics(WheelSpeeds(*w2), GEOM)
    assert bc.vx == pytest.approx(a * b1.vx + b * b2.vx, abs=1e-9)
    assert bc.vy == pytest.approx(a * b1.vy + b * b2.vy, abs=1e-9)
    assert bc.omega == pytest.approx(a * b1.omega + b * b2.omega, abs=1e-9)


def test_forward_kinematics_antisymmetry():
    rng = random.Random(11)
    for _ in range(200):
        w = [rng.uniform(-80, 80) for _ in range(3)]
        b = forward_kinematics(WheelSpeeds(*w), GEOM)
        nb = forward_kinematics(WheelSpeeds(*(-x for x in w)), GEOM)
        assert (nb.vx, nb.vy, nb.omega) == (-b.vx, -b.vy, -b.omega)


def test_round_trips_are_identities():
    rng = random.Random(3)
    for _ in range(1000):
        b = BodyVelocity(rng.uniform(-100, 100), rng.uniform(-100, 100), rng.uniform(-4, 4))
        rb = forward_kinematics(inverse_kinematics(b, GEOM), GEOM)
        for got, want in [(rb.vx, b.vx), (rb.vy, b.vy), (rb.omega, b.omega)]:
            assert abs(got - want) <= 1e-9 * max(1.0, abs(want))
        w = WheelSpeeds(*(rng.uniform(-100, 100) for _ in range(3)))
        rw = inverse_kinematics(forward_kinematics(w, GEOM), GEOM)
        for got, want in zip(rw.as_tuple(), w.as_tuple()):
            assert abs(got - want) <= 1e-9 * max(1.0, abs(want))


def test_inverse_kinematics_examples():
    z = inverse_kinematics(BodyVelocity(0.0, 0.0, 0.0), GEOM)
    assert z.as_tuple() == (0.0, 0.0, 0.0)
    omega = 0.8
    spin = inverse_kinematics(BodyVelocity(0.0, 0.0, omega), GEOM)
    expect = omega * GEOM.wheel_offset_radius
    assert spin.as_tuple() == pytest.approx((expect, expect, expect), rel=1e-12)
    # Unit translation along +N comes back as the (0, +1, -1) pattern.
    nx, ny = next(h.unit_vector for h in hex_directions(GEOM) if h.label == "+N")
    w = inverse_kinematics(BodyVelocity(nx, ny, 0.0), GEOM)
    assert w.v1 == pytest.approx(0.0, abs=1e-12)
    assert w.v2 == pytest.approx(-w.v3, rel=1e-12)
    assert w.v2 > 0


def test_pattern_labelling():
    assert hex_direction_for_pattern(WheelSpeeds(5.0, -5.0, 0.0), GEOM).label == "-M"
    assert hex_direction_for_pattern(WheelSpeeds(-5.0, 0.0, 5.0), GEOM).label == "-L"
    assert hex_direction_for_pattern(WheelSpeeds(5.0, 5.0, 5.0), GEOM) is None
    assert hex_direction_for_pattern(WheelSpeeds(0.0, 0.0, 0.0), GEOM) is None


def test_pattern_labelling_all_rows():
    for label, pattern in DRIVE_PATTERNS.items():
        got = hex_direction_for_pattern(WheelSpeeds(*(3.0 * p for p in pattern)), GEOM)
        assert got is not None and got.label == label


def test_rotated_wheel_placement_keeps_pattern_labels():
    # The label frame is anchored to wheel 1, so rotating the whole
    # wheel set must not change which pattern maps to which label.
    rotated = BaseGeometry(wheel_position_angles=(210.0, 330.0, 90.0))
    for label, pattern in DRIVE_PATTERNS.items():
        got = hex_direction_for_pattern(WheelSpeeds(*(2.0 * p for p in pattern)), rotated)
        assert got is not None and got.label == label


def test_geometry_validation():
    with pytest.raises(ValueError):
        BaseGeometry(wheel_offset_radius=-1.0)
    with pytest.raises(ValueError):
        BaseGeometry(wheel_position_angles=(0.0, 90.0, 240.0))
    with pytest.raises(ValueError):
        WheelSpeeds(float("nan"), 0.0, 0.0)
    with pytest.raises(ValueError):
        BodyVelocity(float("inf"), 0.0, 0.0)


def test_calibration_mean_of_speed_trials():
    samples = [CalibrationSample(dt, dd) for dt, dd in SPEED_TRIALS]
    mean = calibrate_speed(samples)
    # Exact mean of dd/dt over the twelve trials is 157369/7920000.
    assert mean == pytest.approx(0.019869823232323232, abs=1e-12)
    assert 0.0195 <= mean <= 0.0200
    assert mean == pytest.approx(0.0197, abs=5e-4)


def test_calibration_single_samples():
    assert calibrate_speed([CalibrationSample(2000, 40.0)]) == pytest.approx(0.020)
    assert calibrate_speed([CalibrationSample(1000, 0.0)]) == 0.0
    with pytest.raises(ValueError):
        calibrate_speed([])
    with pytest.raises(ValueError):
        CalibrationSample(0, 10.0)
    with pytest.raises(ValueError):
        CalibrationSample(1000, -1.0)


def test_calibration_csv_round_trip(tmp_path):
    path = tmp_path / "trials.csv"
    path.write_text("dt_ms,dd_cm\n" + "\n".join(f"{dt},{dd}" for dt, dd in SPEED_TRIALS) + "\n")
    samples = load_calibration_samples(path)
    assert len(samples) == 12
    assert calibrate_speed(samples) == pytest.approx(0.019869823232323232, abs=1e-12)


def test_calibration_csv_errors(tmp_path):
    bad_header = tmp_path / "h.csv"
    bad_header.write_text("ms,cm\n1000,10\n")
    with pytest.raises(CalibrationFormatError) as err:
        load_calibration_samples(bad_header)
    assert err.value.line == 1

    bad_row = tmp_path / "r.csv"
    bad_row.write_text("dt_ms,dd_cm\n1000,10\n2000,abc\n")
    with pytest.raises(CalibrationFormatError) as err:
        load_calibration_samples(bad_row)
    assert err.value.line == 3

    empty = tmp_path / "e.csv"
    empty.write_text("dt_ms,dd_cm\n")
    with pytest.raises(CalibrationFormatError):
        load_calibration_samples(empty)


def test_matrix_is_well_conditioned():
    m = np.array(
        [[-math.sin(math.radians(a)), math.cos(math.radians(a)), GEOM.wheel_offset_radius]
         for a in GEOM.wheel_position_angles]
    )
    assert abs(np.linalg.det(m)) > 1e-6
