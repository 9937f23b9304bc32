"""Three-element pneumatic muscle model with pressure-affine coefficients.

The muscle is a parallel connection of a contractile force element, a spring
and a damper, all affine in the applied pressure:

    mass * xddot + b(P) * xdot + k(P) * x = f(P) - mass * g

The spring pair (k0, k1) switches branch at the breakpoint pressure and the
damping pair (b0, b1) switches with the aeration direction, which gives the
model its hysteresis. An additive acceleration-level disturbance lumps every
unmodeled effect.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import IntegrationDivergedError

GRAVITY = 9.81  # m/s^2

INFLATING = "inflating"
DEFLATING = "deflating"

# Command changes smaller than this keep the previous aeration direction (Pa).
DIRECTION_DEADBAND = 1.0

# Classical RK4 is stable on the real axis up to |lambda|*h ~ 2.785; substeps
# are sized to keep the fastest plant eigenvalue inside this margin.
_STABLE_STEP_MARGIN = 2.0
_MAX_SUBSTEPS = 4096


@dataclass(frozen=True)
class PmaParams:
    """Identified coefficients of the three-element muscle model.

    Defaults are the identified values for a 20 mm fluidic muscle with a
    0-6 bar operating range; every field can be overridden so the plant
    truth and the controller's nominal model may differ.
    """

    f0: float = -202.32       # contractile force offset, N
    f1: float = 0.00721       # contractile force gain, N/Pa
    k01: float = 18063.0      # spring offset, low-pressure branch, N/m
    k02: float = 0.01051      # spring gain, low-pressure branch, N/(m*Pa)
    k11: float = -0.2132      # spring offset, high-pressure branch, N/m
    k12: float = 90638.0      # spring gain, high-pressure branch, N/(m*Pa)
    b0i: float = 6435.31      # damping offset while inflating, N*s/m
    b1i: float = 0.10023      # damping gain while inflating, N*s/(m*Pa)
    b0d: float = 2522.01      # damping offset while deflating, N*s/m
    b1d: float = 0.00321      # damping gain while deflating, N*s/(m*Pa)
    mass: float = 1.0         # total moving mass, kg
    p_break: float = 325420.0  # spring branch switch pressure, Pa
    p_min: float = 0.0        # actuator pressure limits, Pa
    p_max: float = 6.0e5

    def __post_init__(self):
        if not self.mass > 0.0:
            raise ValueError(f"mass must be positive, got {self.mass}")
        if self.p_min < 0.0 or not self.p_max > self.p_min:
            raise ValueError(
                f"pressure limits must satisfy 0 <= p_min < p_max, got "
                f"[{self.p_min}, {self.p_max}]"
            )
        if not (self.p_min < self.p_break < self.p_max):
            raise ValueError(
                f"p_break={self.p_break} must lie strictly inside "
                f"[{self.p_min}, {self.p_max}]"
            )

    def scaled(self, factor: float) -> "PmaParams":
        """Copy with all ten force/spring/damping coefficients multiplied."""
        return replace(
            self,
            f0=self.f0 * factor, f1=self.f1 * factor,
            k01=self.k01 * factor, k02=self.k02 * factor,
            k11=self.k11 * factor, k12=self.k12 * factor,
            b0i=self.b0i * factor, b1i=self.b1i * factor,
            b0d=self.b0d * factor, b1d=self.b1d * factor,
        )

    def with_extra_mass(self, extra: float) -> "PmaParams":
        """Copy with an additional attached load mass."""
        return replace(self, mass=self.mass + extra)


#: Identified muscle coefficients (the dataclass defaults, as one instance).
IDENTIFIED_PMA = PmaParams()


@dataclass(frozen=True)
class Coefficients:
    """Damping, spring and contractile-force coefficients at one pressure."""

    b: float  # N*s/m
    k: float  # N/m
    f: float  # N


@dataclass(frozen=True)
class PlantState:
    """Muscle state between fixed integration steps.

    ``p_prev`` is the last applied (clamped) pressure and ``direction`` the
    aeration direction in effect during the last step; together they drive
    the deadband direction detector for the next command.
    """

    x: float = 0.0
    xdot: float = 0.0
    t: float = 0.0
    p_prev: float = 0.0
    direction: str = INFLATING


@dataclass(frozen=True)
class DisturbanceProfile:
    """Smooth acceleration-level disturbance with computable derivative bounds.

    Supported kinds: ``zero``, ``constant``, ``sinusoid`` and
    ``sum-of-sinusoids``. ``eps()`` returns a bound valid for the signal and
    its first two derivatives, which the stability machinery consumes.
    """

    kind: str = "zero"
    amplitudes: tuple[float, ...] = ()
    omegas: tuple[float, ...] = ()
    phases: tuple[float, ...] = ()

    def __post_init__(self):
        kinds = ("zero", "constant", "sinusoid", "sum-of-sinusoids")
        if self.kind not in kinds:
            raise ValueError(f"unknown disturbance kind {self.kind!r}")
        if self.kind == "zero" and self.amplitudes:
            raise ValueError("zero disturbance takes no amplitudes")
        if self.kind == "constant" and len(self.amplitudes) != 1:
            raise ValueError("constant disturbance takes exactly one amplitude")
        if self.kind in ("sinusoid", "sum-of-sinusoids"):
            n = len(self.amplitudes)
            if self.kind == "sinusoid" and n != 1:
                raise ValueError("sinusoid takes exactly one component")
            if n == 0 or len(self.omegas) != n or len(self.phases) != n:
                raise ValueError("amplitudes, omegas and phases must align")

    @classmethod
    def zero(cls) -> "DisturbanceProfile":
        return cls("zero")

    @classmethod
    def constant(cls, value: float) -> "DisturbanceProfile":
        return cls("constant", (value,))

    @classmethod
    def sinusoid(cls, amplitude: float, omega: float, phase: float = 0.0
                 ) -> "DisturbanceProfile":
        return cls("sinusoid", (amplitude,), (omega,), (phase,))

    @classmethod
    def sum_of_sinusoids(cls, amplitudes, omegas, phases=None
                         ) -> "DisturbanceProfile":
        amplitudes = tuple(amplitudes)
        omegas = tuple(omegas)
        phases = tuple(phases) if phases is not None else (0.0,) * len(amplitudes)
        return cls("sum-of-sinusoids", amplitudes, omegas, phases)

    def eval(self, t: float) -> float:
        if self.kind == "zero":
            return 0.0
        if self.kind == "constant":
            return self.amplitudes[0]
        total = 0.0
        for a, w, ph in zip(self.amplitudes, self.omegas, self.phases):
            total += a * math.sin(w * t + ph)
        return total

    def deriv(self, t: float) -> float:
        if self.kind in ("zero", "constant"):
            return 0.0
        total = 0.0
        for a, w, ph in zip(self.amplitudes, self.omegas, self.phases):
            total += a * w * math.cos(w * t + ph)
        return total

    def deriv2(self, t: float) -> float:
        if self.kind in ("zero", "constant"):
            return 0.0
        total = 0.0
        for a, w, ph in zip(self.amplitudes, self.omegas, self.phases):
            total -= a * w * w * math.sin(w * t + ph)
        return total

    def eps(self) -> float:
        """Bound on |signal|, |rate| and |curvature|, from the amplitudes."""
        if self.kind == "zero":
            return 0.0
        if self.kind == "constant":
            return abs(self.amplitudes[0])
        best = 0.0
        for order in (0, 1, 2):
            total = sum(abs(a) * w ** order
                        for a, w in zip(self.amplitudes, self.omegas))
            best = max(best, total)
        return best


def next_direction(previous: str, p_prev: float, command: float) -> str:
    """Aeration direction for a clamped command, with a 1 Pa deadband.

    Commands within the deadband of the previously applied pressure keep the
    previous direction.
    """
    if command > p_prev + DIRECTION_DEADBAND:
        return INFLATING
    if command < p_prev - DIRECTION_DEADBAND:
        return DEFLATING
    return previous


def coefficients(params: PmaParams, pressure: float, direction: str
                 ) -> Coefficients:
    """Damping, spring and force coefficients at one pressure and direction.

    The spring uses the low branch for pressures up to and including the
    breakpoint and the high branch strictly above it.
    """
    if not (params.p_min <= pressure <= params.p_max):
        raise ValueError(
            f"pressure {pressure} Pa outside limits "
            f"[{params.p_min}, {params.p_max}]"
        )
    if direction == INFLATING:
        b = params.b0i + params.b1i * pressure
    elif direction == DEFLATING:
        b = params.b0d + params.b1d * pressure
    else:
        raise ValueError(f"unknown direction {direction!r}")
    if pressure <= params.p_break:
        k = params.k01 + params.k02 * pressure
    else:
        k = params.k11 + params.k12 * pressure
    f = params.f0 + params.f1 * pressure
    return Coefficients(b=b, k=k, f=f)


def acceleration(params: PmaParams, state: PlantState, pressure: float,
                 direction: str, disturbance: float = 0.0) -> float:
    """Muscle acceleration at one state, pressure and disturbance sample."""
    c = coefficients(params, pressure, direction)
    m = params.mass
    return (c.f - m * GRAVITY - c.b * state.xdot - c.k * state.x) / m + disturbance


def affine_terms(params: PmaParams, x: float, xdot: float, pressure: float,
                 direction: str) -> tuple[float, float]:
    """Drift term f(x, xdot) and input gain b(x, xdot) of the control-affine form.

    The model rewritten as ``xddot = f(x, xdot) + b(x, xdot) * u + tau`` has

        f(x, xdot) = (f0 - mass*g - b0*xdot - k0*x) / mass
        b(x, xdot) = (f1 - b1*xdot - k1*x) / mass

    with the damping pair picked by ``direction`` and the spring pair by
    ``pressure`` (the last applied command).
    """
    if direction == INFLATING:
        b0, b1 = params.b0i, params.b1i
    elif direction == DEFLATING:
        b0, b1 = params.b0d, params.b1d
    else:
        raise ValueError(f"unknown direction {direction!r}")
    if pressure <= params.p_break:
        k0, k1 = params.k01, params.k02
    else:
        k0, k1 = params.k11, params.k12
    m = params.mass
    drift = (params.f0 - m * GRAVITY - b0 * xdot - k0 * x) / m
    gain = (params.f1 - b1 * xdot - k1 * x) / m
    return drift, gain


def stable_substeps(params: PmaParams, pressure: float, direction: str,
                    dt: float) -> int:
    """Number of RK4 substeps keeping the step inside the stability margin.

    The within-step dynamics are linear with constant coefficients (pressure
    is held), so the fastest eigenvalue magnitude follows from b and k.
    """
    c = coefficients(params, pressure, direction)
    bm = abs(c.b) / params.mass
    km = c.k / params.mass
    disc = bm * bm - 4.0 * km
    if disc >= 0.0:
        lam = 0.5 * (bm + math.sqrt(disc))
    else:
        lam = math.sqrt(km)
    n = int(math.ceil(dt * lam / _STABLE_STEP_MARGIN))
    return min(max(n, 1), _MAX_SUBSTEPS)


def step(params: PmaParams, state: PlantState, pressure_command: float,
         disturbance: DisturbanceProfile, dt: float) -> PlantState:
    """Advance the muscle one fixed step under a zero-order-hold pressure.

    The command is clamped to the actuator limits, the aeration direction
    detected against the previously applied pressure, and (x, xdot)
    integrated with classical RK4. Stiff coefficient sets are subdivided
    into equal RK4 substeps so that the integration stays stable; soft
    configurations take a single step.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    if not math.isfinite(pressure_command):
        raise ValueError(f"pressure command must be finite, got {pressure_command}")
    p = min(max(pressure_command, params.p_min), params.p_max)
    direction = next_direction(state.direction, state.p_prev, p)
    c = coefficients(params, p, direction)
    m = params.mass
    drift = (c.f - m * GRAVITY) / m
    bm = c.b / m
    km = c.k / m

    n = stable_substeps(params, p, direction, dt)
    h = dt / n
    half = 0.5 * h
    sixth = h / 6.0
    x = state.x
    v = state.xdot
    t0 = state.t
    ev = disturbance.eval
    for i in range(n):
        ts = t0 + i * h
        d0 = ev(ts)
        dm = ev(ts + half)
        d1 = ev(ts + h)
        a1 = drift - bm * v - km * x + d0
        v2 = v + half * a1
        x2 = x + half * v
        a2 = drift - bm * v2 - km * x2 + dm
        v3 = v + half * a2
        x3 = x + half * v2
        a3 = drift - bm * v3 - km * x3 + dm
        v4 = v + h * a3
        x4 = x + h * v3
        a4 = drift - bm * v4 - km * x4 + d1
        x = x + sixth * (v + 2.0 * v2 + 2.0 * v3 + v4)
        v = v + sixth * (a1 + 2.0 * a2 + 2.0 * a3 + a4)

    t_new = state.t + dt
    if not (math.isfinite(x) and math.isfinite(v)):
        raise IntegrationDivergedError("plant state non-finite", t=t_new)
    return PlantState(x=x, xdot=v, t=t_new, p_prev=p, direction=direction)
