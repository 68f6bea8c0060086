"""Gyro-only attitude pipeline: bias calibration, quaternion integration,
Tait-Bryan conversion, and tilt from vertical.

Frames: world is ENU with +z up; the body +z axis is the vehicle's
longitudinal axis, so the identity quaternion is an upright vehicle.
Quaternions are Hamilton (w, x, y, z) and map body vectors into the world
frame. Euler angles are intrinsic Z-Y-X (yaw, then pitch, then roll),
in degrees.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import MotionDetected, NonFiniteInput, TooFewSamples

_RAD2DEG = 180.0 / math.pi
_DEG2RAD = math.pi / 180.0


@dataclass(frozen=True, slots=True)
class Vec3:
    """A 3-vector of floats; units depend on context (rad/s, m/s^2, N, ...)."""

    x: float
    y: float
    z: float

    @staticmethod
    def zero() -> "Vec3":
        return Vec3(0.0, 0.0, 0.0)

    def __add__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x - other.x, self.y - other.y, self.z - other.z)

    def scale(self, k: float) -> "Vec3":
        return Vec3(k * self.x, k * self.y, k * self.z)

    def dot(self, other: "Vec3") -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def cross(self, other: "Vec3") -> "Vec3":
        return Vec3(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def is_finite(self) -> bool:
        return math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.z)


@dataclass(frozen=True, slots=True)
class Quaternion:
    """Unit rotation quaternion (w, x, y, z), body frame to world frame."""

    w: float
    x: float
    y: float
    z: float

    @staticmethod
    def identity() -> "Quaternion":
        return Quaternion(1.0, 0.0, 0.0, 0.0)

    @staticmethod
    def from_axis_angle(axis: Vec3, angle_rad: float) -> "Quaternion":
        n = axis.norm()
        if n == 0.0:
            return Quaternion.identity()
        half = 0.5 * angle_rad
        s = math.sin(half) / n
        return Quaternion(math.cos(half), axis.x * s, axis.y * s, axis.z * s)

    def norm(self) -> float:
        return math.sqrt(self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z)

    def normalized(self) -> "Quaternion":
        n = self.norm()
        if n == 0.0 or not math.isfinite(n):
            raise NonFiniteInput("cannot normalize a zero or non-finite quaternion")
        inv = 1.0 / n
        return Quaternion(self.w * inv, self.x * inv, self.y * inv, self.z * inv)

    def conjugate(self) -> "Quaternion":
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def multiply(self, other: "Quaternion") -> "Quaternion":
        w1, x1, y1, z1 = self.w, self.x, self.y, self.z
        w2, x2, y2, z2 = other.w, other.x, other.y, other.z
        return Quaternion(
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        )

    def rotate(self, v: Vec3) -> Vec3:
        """Rotate a body-frame vector into the world frame."""
        w, x, y, z = self.w, self.x, self.y, self.z
        # v' = v + 2*w*(q_v x v) + 2*(q_v x (q_v x v))
        tx = 2.0 * (y * v.z - z * v.y)
        ty = 2.0 * (z * v.x - x * v.z)
        tz = 2.0 * (x * v.y - y * v.x)
        return Vec3(
            v.x + w * tx + (y * tz - z * ty),
            v.y + w * ty + (z * tx - x * tz),
            v.z + w * tz + (x * ty - y * tx),
        )

    def is_finite(self) -> bool:
        return (
            math.isfinite(self.w)
            and math.isfinite(self.x)
            and math.isfinite(self.y)
            and math.isfinite(self.z)
        )


@dataclass(frozen=True, slots=True)
class EulerAngles:
    """Intrinsic Z-Y-X (yaw, pitch, roll) decomposition in degrees.

    yaw is the rotation about world-up; pitch and roll are the two
    transverse tilt components. yaw and roll lie in (-180, 180], pitch
    in [-90, 90].
    """

    yaw_deg: float
    pitch_deg: float
    roll_deg: float


@dataclass(frozen=True, slots=True)
class ImuSample:
    """One IMU reading: body-frame angular rate and specific force."""

    t_s: float
    gyro_rps: Vec3
    accel_mps2: Vec3


@dataclass(frozen=True, slots=True)
class GyroBias:
    """Per-axis gyro bias estimate with the calibration statistics."""

    bias_rps: Vec3
    sample_count: int
    variance_rps2: Vec3

    @staticmethod
    def zero() -> "GyroBias":
        return GyroBias(Vec3.zero(), 0, Vec3.zero())


def calibrate_bias(samples: list[ImuSample], min_count: int, max_variance: float) -> GyroBias:
    """Estimate gyro bias as the per-axis mean over a stationary window.

    Raises TooFewSamples when fewer than min_count samples are given and
    MotionDetected when any axis' population variance exceeds max_variance.
    """
    n = len(samples)
    if n < min_count:
        raise TooFewSamples(f"{n} samples, need at least {min_count}")
    for s in samples:
        if not s.gyro_rps.is_finite():
            raise NonFiniteInput("non-finite gyro sample during calibration")
    mx = math.fsum(s.gyro_rps.x for s in samples) / n
    my = math.fsum(s.gyro_rps.y for s in samples) / n
    mz = math.fsum(s.gyro_rps.z for s in samples) / n
    vx = math.fsum((s.gyro_rps.x - mx) ** 2 for s in samples) / n
    vy = math.fsum((s.gyro_rps.y - my) ** 2 for s in samples) / n
    vz = math.fsum((s.gyro_rps.z - mz) ** 2 for s in samples) / n
    if max(vx, vy, vz) > max_variance:
        raise MotionDetected(
            f"gyro variance ({vx:.3g}, {vy:.3g}, {vz:.3g}) rad^2/s^2 "
            f"exceeds {max_variance:.3g}; vehicle not stationary"
        )
    return GyroBias(Vec3(mx, my, mz), n, Vec3(vx, vy, vz))


def integrate_attitude(q: Quaternion, omega_rps: Vec3, bias: GyroBias, dt_s: float) -> Quaternion:
    """Advance the attitude by one gyro step using the exponential map.

    The bias-corrected body rate is applied as a single axis-angle rotation
    over dt_s, which is exact for a rate held constant over the step. The
    result is renormalized.
    """
    if not (q.is_finite() and omega_rps.is_finite() and math.isfinite(dt_s)):
        raise NonFiniteInput("non-finite attitude integration input")
    wx = (omega_rps.x - bias.bias_rps.x) * dt_s
    wy = (omega_rps.y - bias.bias_rps.y) * dt_s
    wz = (omega_rps.z - bias.bias_rps.z) * dt_s
    angle = math.sqrt(wx * wx + wy * wy + wz * wz)
    if angle < 1e-12:
        # sin(a/2)/a -> 1/2 as a -> 0
        k = 0.5 - angle * angle / 48.0
        dq = Quaternion(1.0 - 0.125 * angle * angle, wx * k, wy * k, wz * k)
    else:
        half = 0.5 * angle
        k = math.sin(half) / angle
        dq = Quaternion(math.cos(half), wx * k, wy * k, wz * k)
    return q.multiply(dq).normalized()


def _wrap_deg(a: float) -> float:
    """Wrap to (-180, 180]."""
    a = math.fmod(a, 360.0)
    if a > 180.0:
        a -= 360.0
    elif a <= -180.0:
        a += 360.0
    return a


def to_tait_bryan(q: Quaternion) -> EulerAngles:
    """Decompose a unit quaternion into intrinsic Z-Y-X yaw, pitch, roll.

    At gimbal lock (|pitch| within 1e-6 deg of 90) roll is defined as zero
    and the residual rotation folds into yaw.
    """
    w, x, y, z = q.w, q.x, q.y, q.z
    sp = 2.0 * (w * y - x * z)
    sp = max(-1.0, min(1.0, sp))
    pitch = math.asin(sp) * _RAD2DEG
    if 90.0 - abs(pitch) <= 1e-6:
        yaw = math.atan2(2.0 * (w * z - x * y), 1.0 - 2.0 * (x * x + z * z)) * _RAD2DEG
        return EulerAngles(_wrap_deg(yaw), math.copysign(90.0, sp), 0.0)
    yaw = math.atan2(2.0 * (x * y + w * z), 1.0 - 2.0 * (y * y + z * z)) * _RAD2DEG
    roll = math.atan2(2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)) * _RAD2DEG
    return EulerAngles(_wrap_deg(yaw), pitch, _wrap_deg(roll))


def from_tait_bryan(e: EulerAngles) -> Quaternion:
    """Build the quaternion for intrinsic Z-Y-X yaw, pitch, roll in degrees."""
    hy = 0.5 * e.yaw_deg * _DEG2RAD
    hp = 0.5 * e.pitch_deg * _DEG2RAD
    hr = 0.5 * e.roll_deg * _DEG2RAD
    cy, sy = math.cos(hy), math.sin(hy)
    cp, sp = math.cos(hp), math.sin(hp)
    cr, sr = math.cos(hr), math.sin(hr)
    return Quaternion(
        cy * cp * cr + sy * sp * sr,
        cy * cp * sr - sy * sp * cr,
        cy * sp * cr + sy * cp * sr,
        sy * cp * cr - cy * sp * sr,
    ).normalized()


def tilt_angle_deg(q: Quaternion) -> float:
    """Angle in degrees between the body longitudinal axis and world-up."""
    # (R(q) * ez) . ez simplifies to 1 - 2*(x^2 + y^2)
    c = 1.0 - 2.0 * (q.x * q.x + q.y * q.y)
    c = max(-1.0, min(1.0, c))
    return math.acos(c) * _RAD2DEG
