"""Attitude pipeline tests: bias calibration, integration, conversions, tilt.

Derived expectations are checked against scipy.spatial.transform.Rotation,
which is independent of the hand-rolled quaternion math under test.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial.transform import Rotation

from tvcsim.attitude import (
    EulerAngles,
    GyroBias,
    ImuSample,
    Quaternion,
    Vec3,
    calibrate_bias,
    from_tait_bryan,
    integrate_attitude,
    tilt_angle_deg,
    to_tait_bryan,
)
from tvcsim.errors import MotionDetected, NonFiniteInput, TooFewSamples


def _sample(g, t=0.0):
    return ImuSample(t, Vec3(*g), Vec3(0.0, 0.0, 9.81))


def _scipy_rot(q: Quaternion) -> Rotation:
    return Rotation.from_quat([q.x, q.y, q.z, q.w])


def _angle_between(q1: Quaternion, q2: Quaternion) -> float:
    """Rotation angle (rad) between two unit quaternions, stable near zero."""
    d = q1.multiply(q2.conjugate())
    vec = math.sqrt(d.x * d.x + d.y * d.y + d.z * d.z)
    return 2.0 * math.atan2(vec, abs(d.w))


# --- calibrate_bias ---------------------------------------------------------

def test_bias_mean_of_constant_samples():
    samples = [_sample((0.01, -0.02, 0.0), t=i * 0.01) for i in range(256)]
    bias = calibrate_bias(samples, min_count=64, max_variance=1e-4)
    assert bias.bias_rps == Vec3(0.01, -0.02, 0.0)
    assert bias.sample_count == 256
    assert bias.variance_rps2 == Vec3(0.0, 0.0, 0.0)


def test_bias_symmetric_mean_is_zero():
    samples = [
        _sample((0.02 if i % 2 == 0 else -0.02, 0.0, 0.0), t=i * 0.01)
        for i in range(256)
    ]
    bias = calibrate_bias(samples, min_count=64, max_variance=1.0)
    assert bias.bias_rps.x == pytest.approx(0.0, abs=1e-15)


def test_bias_motion_detected_on_alternating_half_rps():
    xs = [0.5 if i % 2 == 0 else -0.5 for i in range(256)]
    # oracle: population variance of the constructed sequence
    assert np.var(xs) == pytest.approx(0.25)
    samples = [_sample((x, 0.0, 0.0), t=i * 0.01) for i, x in enumerate(xs)]
    with pytest.raises(MotionDetected):
        calibrate_bias(samples, min_count=64, max_variance=0.01)


def test_bias_too_few_samples():
    samples = [_sample((0.0, 0.0, 0.0), t=i * 0.01) for i in range(10)]
    with pytest.raises(TooFewSamples):
        calibrate_bias(samples, min_count=64, max_variance=1e-4)


# --- integrate_attitude -----------------------------------------------------

def test_integrate_zero_rate_is_identity():
    q = integrate_attitude(Quaternion.identity(), Vec3.zero(), GyroBias.zero(), 0.37)
    assert q == Quaternion.identity()


def test_integrate_quarter_turn_yaw():
    q = Quaternion.identity()
    for _ in range(100):
        q = integrate_attitude(q, Vec3(0.0, 0.0, math.pi / 2), GyroBias.zero(), 0.01)
    e = to_tait_bryan(q)
    assert e.yaw_deg == pytest.approx(90.0, abs=1e-6)
    assert e.pitch_deg == pytest.approx(0.0, abs=1e-6)
    assert e.roll_deg == pytest.approx(0.0, abs=1e-6)


def test_integrate_quarter_turn_roll():
    q = Quaternion.identity()
    for _ in range(50):
        q = integrate_attitude(q, Vec3(math.pi / 2, 0.0, 0.0), GyroBias.zero(), 0.02)
    e = to_tait_bryan(q)
    assert e.roll_deg == pytest.approx(90.0, abs=1e-6)


def test_integrate_rejects_non_finite():
    with pytest.raises(NonFiniteInput):
        integrate_attitude(
            Quaternion.identity(), Vec3(math.nan, 0.0, 0.0), GyroBias.zero(), 0.01
        )


def test_integrate_matches_scipy_for_constant_rate():
    omega = Vec3(0.4, -0.7, 1.1)
    q = Quaternion.identity()
    for _ in range(200):
        q = integrate_attitude(q, omega, GyroBias.zero(), 0.005)
    expected = Rotation.from_rotvec(np.array([0.4, -0.7, 1.1]) * 1.0)
    got = _scipy_rot(q)
    assert (expected.inv() * got).magnitude() == pytest.approx(0.0, abs=1e-9)


def test_integrate_applies_bias_correction():
    bias = GyroBias(Vec3(0.01, -0.02, 0.005), 128, Vec3.zero())
    q = Quaternion.identity()
    for _ in range(1000):
        q = integrate_attitude(q, bias.bias_rps, bias, 0.01)
    # measured rate equals the bias, so the attitude must not move
    assert abs(q.w - 1.0) < 1e-12
    assert abs(q.x) < 1e-12 and abs(q.y) < 1e-12 and abs(q.z) < 1e-12


@given(
    st.lists(
        st.tuples(
            st.floats(-3.0, 3.0), st.floats(-3.0, 3.0), st.floats(-3.0, 3.0)
        ),
        min_size=1,
        max_size=60,
    )
)
def test_integration_preserves_norm(rates):
    q = Quaternion.identity()
    for r in rates:
        q = integrate_attitude(q, Vec3(*r), GyroBias.zero(), 0.02)
    assert abs(q.norm() - 1.0) < 1e-9


@given(
    st.floats(-2.0, 2.0), st.floats(-2.0, 2.0), st.floats(-2.0, 2.0),
    st.integers(1, 50),
)
def test_constant_rate_steps_match_single_rotation(wx, wy, wz, n):
    omega = Vec3(wx, wy, wz)
    dt = 0.01
    q = Quaternion.identity()
    for _ in range(n):
        q = integrate_attitude(q, omega, GyroBias.zero(), dt)
    q_single = integrate_attitude(Quaternion.identity(), omega, GyroBias.zero(), n * dt)
    assert _angle_between(q, q_single) < 1e-9


# --- to_tait_bryan / from_tait_bryan ----------------------------------------

def test_euler_identity():
    e = to_tait_bryan(Quaternion.identity())
    assert (e.yaw_deg, e.pitch_deg, e.roll_deg) == (0.0, 0.0, 0.0)


def test_euler_pure_yaw_90():
    s = math.sqrt(2.0) / 2.0
    q = Quaternion(s, 0.0, 0.0, s)
    # oracle: scipy intrinsic Z-Y-X decomposition
    expected = _scipy_rot(q).as_euler("ZYX", degrees=True)
    e = to_tait_bryan(q)
    assert e.yaw_deg == pytest.approx(expected[0], abs=1e-9)
    assert e.yaw_deg == pytest.approx(90.0, abs=1e-9)
    assert e.pitch_deg == pytest.approx(0.0, abs=1e-9)
    assert e.roll_deg == pytest.approx(0.0, abs=1e-9)


def test_euler_gimbal_lock_folds_roll_into_yaw():
    # yaw 30 then pitch exactly +90: roll must read 0 by convention
    q = from_tait_bryan(EulerAngles(30.0, 90.0, 0.0))
    e = to_tait_bryan(q)
    assert e.pitch_deg == pytest.approx(90.0, abs=1e-9)
    assert e.roll_deg == 0.0
    assert e.yaw_deg == pytest.approx(30.0, abs=1e-6)


@given(
    st.floats(-179.0, 179.0),
    st.floats(-89.5, 89.5),
    st.floats(-179.0, 179.0),
)
def test_euler_round_trip_up_to_sign(yaw, pitch, roll):
    q = from_tait_bryan(EulerAngles(yaw, pitch, roll))
    e = to_tait_bryan(q)
    q2 = from_tait_bryan(e)
    same = max(abs(q.w - q2.w), abs(q.x - q2.x), abs(q.y - q2.y), abs(q.z - q2.z))
    flip = max(abs(q.w + q2.w), abs(q.x + q2.x), abs(q.y + q2.y), abs(q.z + q2.z))
    assert min(same, flip) < 1e-9


@given(
    st.floats(-179.0, 179.0),
    st.floats(-89.0, 89.0),
    st.floats(-179.0, 179.0),
)
@settings(max_examples=50)
def test_euler_matches_scipy(yaw, pitch, roll):
    q = from_tait_bryan(EulerAngles(yaw, pitch, roll))
    expected = _scipy_rot(q).as_euler("ZYX", degrees=True)
    e = to_tait_bryan(q)
    assert e.yaw_deg == pytest.approx(expected[0], abs=1e-6)
    assert e.pitch_deg == pytest.approx(expected[1], abs=1e-6)
    assert e.roll_deg == pytest.approx(expected[2], abs=1e-6)


# --- tilt_angle_deg ----------------------------------------------------------

def test_tilt_identity_is_zero():
    assert tilt_angle_deg(Quaternion.identity()) == 0.0


def test_tilt_pure_pitch():
    q = from_tait_bryan(EulerAngles(0.0, 7.0, 0.0))
    assert tilt_angle_deg(q) == pytest.approx(7.0, abs=1e-9)


def test_tilt_pitch_and_roll_composition():
    q = from_tait_bryan(EulerAngles(0.0, 3.0, 4.0))
    # oracle: rotate world-up by the quaternion via scipy, take arccos
    up_body = _scipy_rot(q).apply([0.0, 0.0, 1.0])
    expected = math.degrees(math.acos(up_body[2]))
    assert expected == pytest.approx(4.9995, abs=2e-3)
    assert tilt_angle_deg(q) == pytest.approx(expected, abs=1e-9)


@given(
    st.floats(-180.0, 180.0),
    st.floats(-179.0, 179.0),
    st.floats(-89.0, 89.0),
    st.floats(-179.0, 179.0),
)
def test_tilt_invariant_under_world_up_precomposition(spin, yaw, pitch, roll):
    q = from_tait_bryan(EulerAngles(yaw, pitch, roll))
    q_up = Quaternion.from_axis_angle(Vec3(0.0, 0.0, 1.0), math.radians(spin))
    assert tilt_angle_deg(q_up.multiply(q)) == pytest.approx(
        tilt_angle_deg(q), abs=1e-9
    )
