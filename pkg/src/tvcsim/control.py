"""Two-axis TVC control: per-axis PID, gimbal/servo linkage mixing, and
Ziegler-Nichols ultimate-cycle tuning.

The gimbal has two deflection axes. The pitch axis torques the body about
+y; the second axis (called yaw throughout control and telemetry) torques
the body about +x. In the Z-Y-X Tait-Bryan decomposition those two tilt
components sit in the pitch and roll slots; the spin about world-up (the
yaw slot) cannot be actuated by a single nozzle and is never controlled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np
from scipy.signal import find_peaks

from .attitude import EulerAngles
from .errors import (
    NonFiniteInput,
    NonPositiveInput,
    NoSustainedOscillation,
    UnstableAtMinimum,
)


@dataclass(frozen=True, slots=True)
class PidGains:
    """PID gains: output degrees per degree, degree-second, degree/second."""

    kp: float
    ki: float
    kd: float

    def __post_init__(self):
        for name in ("kp", "ki", "kd"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0.0:
                raise NonFiniteInput(f"{name} must be finite and >= 0, got {v}")

    @staticmethod
    def zero() -> "PidGains":
        return PidGains(0.0, 0.0, 0.0)


@dataclass(frozen=True, slots=True)
class PidState:
    """Controller memory threaded through pid_step calls."""

    integral: float = 0.0
    prev_error: float | None = None
    integral_limit: float = 10.0
    output_limit: float = 10.0


@dataclass(frozen=True, slots=True)
class GimbalCommand:
    """Commanded thrust deflection, degrees on each gimbal axis."""

    pitch_deflect_deg: float
    yaw_deflect_deg: float


@dataclass(frozen=True, slots=True)
class GimbalGeometry:
    """Linkage and limits between the controller, servos, and gimbal."""

    linkage_ratio: float = 2.0          # servo degrees per gimbal degree
    authority_limit_deg: float = 10.0   # control bound on commanded deflection
    mechanical_range_deg: float = 15.0  # hard gimbal travel limit
    servo_rate_limit_dps: float = 600.0
    servo_offset_pitch_deg: float = 0.0  # commanded trim at the servo horn
    servo_offset_yaw_deg: float = 0.0

    def __post_init__(self):
        if not (0.0 < self.authority_limit_deg <= self.mechanical_range_deg):
            raise NonPositiveInput(
                "authority_limit_deg must be in (0, mechanical_range_deg]"
            )
        if self.linkage_ratio <= 0.0:
            raise NonPositiveInput("linkage_ratio must be > 0")


@dataclass(frozen=True, slots=True)
class ServoCommand:
    """Angles at the servo horns, degrees."""

    servo_pitch_deg: float = 0.0
    servo_yaw_deg: float = 0.0


@dataclass(frozen=True, slots=True)
class ControlTerms:
    """Per-axis P/I/D contributions of one controller step, for logging."""

    pitch_p: float = 0.0
    pitch_i: float = 0.0
    pitch_d: float = 0.0
    yaw_p: float = 0.0
    yaw_i: float = 0.0
    yaw_d: float = 0.0


def _clamp(v: float, limit: float) -> float:
    return max(-limit, min(limit, v))


def pid_step(
    state: PidState, gains: PidGains, error_deg: float, dt_s: float
) -> tuple[float, PidState]:
    """One PID update: returns (output, new state).

    The integral is accumulated by the rectangle rule and clamped to
    +/- integral_limit before use; the derivative is the first difference
    of the error (zero on the first call); the summed output is clamped
    to +/- output_limit.
    """
    if not (math.isfinite(error_deg) and math.isfinite(dt_s)):
        raise NonFiniteInput("non-finite PID input")
    if dt_s <= 0.0:
        raise NonPositiveInput(f"dt_s must be > 0, got {dt_s}")
    integral = _clamp(state.integral + error_deg * dt_s, state.integral_limit)
    if state.prev_error is None:
        derivative = 0.0
    else:
        derivative = (error_deg - state.prev_error) / dt_s
    output = gains.kp * error_deg + gains.ki * integral + gains.kd * derivative
    output = _clamp(output, state.output_limit)
    return output, replace(state, integral=integral, prev_error=error_deg)


def pid_terms(
    state: PidState, gains: PidGains, error_deg: float, dt_s: float
) -> tuple[float, PidState, tuple[float, float, float]]:
    """pid_step plus the individual (p, i, d) contributions pre-clamp."""
    output, new_state = pid_step(state, gains, error_deg, dt_s)
    p = gains.kp * error_deg
    i = gains.ki * new_state.integral
    d = 0.0
    if state.prev_error is not None:
        d = gains.kd * (error_deg - state.prev_error) / dt_s
    return output, new_state, (p, i, d)


def controller_step(
    attitude: EulerAngles,
    setpoint: EulerAngles,
    pitch_pid: tuple[PidGains, PidState],
    yaw_pid: tuple[PidGains, PidState],
    dt_s: float,
    authority_limit_deg: float = 10.0,
) -> tuple[GimbalCommand, tuple[PidState, PidState], ControlTerms]:
    """Run both tilt-axis PIDs and emit a clamped gimbal command.

    The pitch channel acts on the pitch-slot error and the yaw channel on
    the x-axis tilt (the roll slot of the decomposition); positive
    deflections produce positive body torque about the matching axis, so
    feeding setpoint-minus-attitude errors closes the loop with a torque
    that reduces the error. The spin about world-up is not actuated.
    """
    pitch_gains, pitch_state = pitch_pid
    yaw_gains, yaw_state = yaw_pid
    pitch_err = setpoint.pitch_deg - attitude.pitch_deg
    yaw_err = setpoint.roll_deg - attitude.roll_deg
    u_p, pitch_state2, (pp, pi_, pd) = pid_terms(pitch_state, pitch_gains, pitch_err, dt_s)
    u_y, yaw_state2, (yp, yi, yd) = pid_terms(yaw_state, yaw_gains, yaw_err, dt_s)
    cmd = GimbalCommand(
        _clamp(u_p, authority_limit_deg), _clamp(u_y, authority_limit_deg)
    )
    return cmd, (pitch_state2, yaw_state2), ControlTerms(pp, pi_, pd, yp, yi, yd)


def mix_to_servos(
    cmd: GimbalCommand, geom: GimbalGeometry, prev: ServoCommand, dt_s: float
) -> ServoCommand:
    """Map a gimbal command to servo angles through the pushrod linkage.

    Applies the linkage ratio and trim offsets, limits travel from the
    previous command by the servo slew rate, and clamps to the mechanical
    range expressed at the servo horn.
    """
    if dt_s <= 0.0:
        raise NonPositiveInput(f"dt_s must be > 0, got {dt_s}")
    max_step = geom.servo_rate_limit_dps * dt_s
    max_travel = geom.mechanical_range_deg * geom.linkage_ratio

    def one_axis(target: float, previous: float) -> float:
        step = _clamp(target - previous, max_step)
        return _clamp(previous + step, max_travel)

    target_p = cmd.pitch_deflect_deg * geom.linkage_ratio + geom.servo_offset_pitch_deg
    target_y = cmd.yaw_deflect_deg * geom.linkage_ratio + geom.servo_offset_yaw_deg
    return ServoCommand(
        one_axis(target_p, prev.servo_pitch_deg),
        one_axis(target_y, prev.servo_yaw_deg),
    )


def zn_classic_gains(ku: float, tu_s: float) -> PidGains:
    """Classic Ziegler-Nichols PID row from the ultimate gain and period."""
    if not (ku > 0.0 and tu_s > 0.0):
        raise NonPositiveInput(f"ku and tu_s must be > 0, got ku={ku}, tu_s={tu_s}")
    return PidGains(kp=0.6 * ku, ki=1.2 * ku / tu_s, kd=0.075 * ku * tu_s)


# --- ultimate-cycle search ----------------------------------------------------

#: classification labels for a proportional-only closed-loop response
_DECAY, _SUSTAINED, _GROW = "decay", "sustained", "grow"

_RATIO_BAND = (0.9, 1.1)
_MIN_PEAKS = 4


def classify_oscillation(
    t: Sequence[float], err: Sequence[float]
) -> tuple[str, float | None]:
    """Classify an error series as decaying, sustained, or growing.

    Sustained means at least four successive peaks whose amplitude ratios
    all fall in [0.9, 1.1]; the returned period is the mean peak-to-peak
    spacing over the peaks examined (None when fewer than two peaks exist).
    """
    t = np.asarray(t, dtype=float)
    err = np.asarray(err, dtype=float)
    if not np.all(np.isfinite(err)):
        return _GROW, None
    scale = float(np.max(np.abs(err))) if err.size else 0.0
    if scale == 0.0:
        return _DECAY, None
    idx, _ = find_peaks(err, prominence=0.02 * scale)
    if len(idx) < 2:
        # no oscillation; monotone divergence still counts as growth
        q = max(1, err.size // 4)
        head = float(np.sqrt(np.mean(err[:q] ** 2)))
        last = float(np.sqrt(np.mean(err[-q:] ** 2)))
        return (_GROW if last > 2.0 * max(head, 1e-12) else _DECAY), None
    # judge steady behavior on the trailing peaks, past the startup transient
    tail = idx[-min(8, len(idx)):]
    amps = err[tail]
    period = float(np.mean(np.diff(t[tail])))
    if len(tail) < _MIN_PEAKS:
        return (_GROW if amps[-1] > amps[0] else _DECAY), period
    # an actuator-saturated limit cycle far above the seed amplitude has
    # near-unity peak ratios but is still a diverged loop
    if float(np.max(amps)) > 3.0 * float(err[idx[0]]):
        return _GROW, period
    ratios = amps[1:] / amps[:-1]
    lo, hi = _RATIO_BAND
    if np.all((ratios >= lo) & (ratios <= hi)):
        return _SUSTAINED, period
    gmean = float(np.exp(np.mean(np.log(np.maximum(ratios, 1e-12)))))
    return (_DECAY if gmean < 1.0 else _GROW), period


def find_ultimate_cycle(
    plant: Callable[[float], tuple[Sequence[float], Sequence[float]]],
    kp_min: float,
    kp_max: float,
    tolerance: float = 0.005,
) -> tuple[float, float]:
    """Locate the ultimate gain and period of a proportional-only loop.

    The plant callback runs a closed loop at the given kp and returns the
    (times, error) series. Bisection over [kp_min, kp_max] finds the
    smallest gain whose response qualifies as a sustained oscillation;
    tolerance is the relative kp resolution of the search.

    Raises NoSustainedOscillation when even kp_max decays and
    UnstableAtMinimum when kp_min already grows.
    """
    if not (0.0 < kp_min < kp_max):
        raise NonPositiveInput("need 0 < kp_min < kp_max")

    def evaluate(kp: float) -> tuple[str, float | None]:
        t, err = plant(kp)
        return classify_oscillation(t, err)

    verdict_lo, _ = evaluate(kp_min)
    if verdict_lo == _GROW:
        raise UnstableAtMinimum(f"loop already diverges at kp_min={kp_min}")
    verdict_hi, period_hi = evaluate(kp_max)
    if verdict_hi == _DECAY:
        raise NoSustainedOscillation(
            f"loop still decays at kp_max={kp_max}; widen the kp range"
        )
    if verdict_lo != _DECAY:
        # the whole range oscillates; the smallest gain searched qualifies
        _, period_lo = evaluate(kp_min)
        return kp_min, period_lo if period_lo else math.nan

    lo, hi = kp_min, kp_max
    hi_period = period_hi
    while (hi - lo) / hi > tolerance:
        mid = 0.5 * (lo + hi)
        verdict, period = evaluate(mid)
        if verdict == _DECAY:
            lo = mid
        else:
            hi = mid
            hi_period = period
    if hi_period is None or not math.isfinite(hi_period) or hi_period <= 0.0:
        raise NoSustainedOscillation("no usable oscillation period at the boundary")
    return hi, hi_period
