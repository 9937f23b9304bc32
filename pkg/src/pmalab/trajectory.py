"""Reference trajectories with analytic derivatives.

Two kinds: a fixed-frequency sinusoid and a linear chirp whose instantaneous
frequency ramps between two values over a span. Both return position,
velocity and acceleration in closed form so the control laws receive exact
feedforward terms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .control import Reference

FIXED_SINE = "fixed-sine"
LINEAR_CHIRP = "linear-chirp"

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Trajectory:
    """Reference description: x_d(t) = A sin(phase(t)) + B.

    For the fixed sine, phase(t) = 2*pi*f*t. For the chirp, the frequency
    ramps linearly from ``f_start`` to ``f_end`` over ``span`` seconds and
    the phase is its integral. Offsets must keep the commanded contraction
    non-negative (B - A >= 0).
    """

    kind: str = FIXED_SINE
    amplitude: float = 0.015   # m
    offset: float = 0.015      # m
    frequency: float = 0.25    # Hz, fixed-sine only
    f_start: float = 0.1       # Hz, chirp only
    f_end: float = 0.5
    span: float = 20.0         # s, chirp only

    def __post_init__(self):
        if self.kind not in (FIXED_SINE, LINEAR_CHIRP):
            raise ValueError(f"unknown trajectory kind {self.kind!r}")
        if self.amplitude < 0.0:
            raise ValueError(f"amplitude must be non-negative, got {self.amplitude}")
        if self.offset - self.amplitude < 0.0:
            raise ValueError(
                f"offset - amplitude = {self.offset - self.amplitude} would "
                f"command a negative contraction"
            )
        if self.kind == LINEAR_CHIRP and not self.span > 0.0:
            raise ValueError(f"chirp span must be positive, got {self.span}")


def reference_at(traj: Trajectory, t: float) -> Reference:
    """Reference position/velocity/acceleration at time ``t`` (>= 0)."""
    if t < 0.0:
        raise ValueError(f"reference time must be non-negative, got {t}")
    a = traj.amplitude
    if traj.kind == FIXED_SINE:
        w = _TWO_PI * traj.frequency
        phase = w * t
        sin_p = math.sin(phase)
        cos_p = math.cos(phase)
        return Reference(
            xd=a * sin_p + traj.offset,
            xddot=a * w * cos_p,
            xdddot=-a * w * w * sin_p,
        )
    # Linear chirp: phase(t) = 2*pi*(f_start*t + (f_end - f_start)*t^2/(2*span))
    rate = (traj.f_end - traj.f_start) / traj.span
    phase = _TWO_PI * (traj.f_start * t + 0.5 * rate * t * t)
    phase_dot = _TWO_PI * (traj.f_start + rate * t)
    phase_ddot = _TWO_PI * rate
    sin_p = math.sin(phase)
    cos_p = math.cos(phase)
    return Reference(
        xd=a * sin_p + traj.offset,
        xddot=a * cos_p * phase_dot,
        xdddot=-a * sin_p * phase_dot * phase_dot + a * cos_p * phase_ddot,
    )
