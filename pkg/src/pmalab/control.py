"""Tracking control laws for the muscle: proxy-based and conventional.

Two sliding manifolds drive the design,

    S_q = (xd_dot - xdot)  + c1*(xd - x)  + c2 * int(xd - x)  dt
    S_p = (xd_dot - xpdot) + c1*(xd - xp) + c2 * int(xd - xp) dt

where xp is the position of an imaginary proxy object. The proxy follows an
equivalent sliding-mode force Gamma*sgn(S_p) while a PID-type virtual
coupling (Kp, Ki, Kd) drags the plant after the proxy; the observer-
compensated proxy law additionally cancels the estimated disturbance. The
conventional laws drive S_q directly with a boundary-layer switching term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ProxyDivergedError, SingularGainError
from .observer import ObserverGains, ObserverState
from .plant import PmaParams, affine_terms

_STABLE_STEP_MARGIN = 1.5
_MAX_SUBSTEPS = 4096


@dataclass(frozen=True)
class PsmcGains:
    """Gain vector of the proxy-based laws plus the proxy mass.

    The eight tunable entries [gamma, c1, c2, kp, ki, kd, l1, l2] form the
    search vector for the parameter tuner; m_p scales the proxy inertia.
    The feasibility gate, not the constructor, judges validity so that the
    tuner may probe arbitrary boxes.
    """

    gamma: float   # switching gain on sgn(S_p)
    c1: float      # manifold coefficient, 1/s
    c2: float      # manifold coefficient, 1/s^2
    kp: float      # virtual coupling gains
    ki: float
    kd: float
    l1: float      # observer gains
    l2: float
    m_p: float = 1.0  # proxy mass

    def vector(self) -> np.ndarray:
        return np.array([self.gamma, self.c1, self.c2, self.kp, self.ki,
                         self.kd, self.l1, self.l2])

    @classmethod
    def from_vector(cls, s, m_p: float = 1.0) -> "PsmcGains":
        g, c1, c2, kp, ki, kd, l1, l2 = (float(v) for v in s)
        return cls(gamma=g, c1=c1, c2=c2, kp=kp, ki=ki, kd=kd,
                   l1=l1, l2=l2, m_p=m_p)

    def observer_gains(self) -> ObserverGains:
        return ObserverGains(l1=self.l1, l2=self.l2)


@dataclass(frozen=True)
class SmcGains:
    """Gains of the conventional boundary-layer sliding-mode law."""

    c1: float
    c2: float
    k_sw: float   # switching gain, acceleration scale (m/s^2)
    phi: float    # boundary-layer width in S_q units (m/s)

    def __post_init__(self):
        if not self.phi > 0.0:
            raise ValueError(f"boundary-layer width must be positive, got {self.phi}")


@dataclass(frozen=True)
class Reference:
    """Desired position, velocity and acceleration at one instant."""

    xd: float
    xddot: float
    xdddot: float


@dataclass(frozen=True)
class ProxyState:
    """Proxy position/velocity and the three integral accumulators.

    ``ep`` integrates (xp - x), ``int_exd`` integrates (xd - x) and
    ``int_exp`` integrates (xd - xp); the three always satisfy
    int_exd - int_exp = ep.
    """

    xp: float = 0.0
    xpdot: float = 0.0
    ep: float = 0.0
    int_exd: float = 0.0
    int_exp: float = 0.0

    @classmethod
    def initial(cls, ref: Reference) -> "ProxyState":
        """Proxy launched on the reference so xd - xp starts at zero."""
        return cls(xp=ref.xd, xpdot=ref.xddot)


@dataclass(frozen=True)
class ControlOutput:
    """Clamped pressure command with the manifold values alongside."""

    u: float
    sq: float
    sp: float
    saturated: bool


def b_floor(nominal: PmaParams) -> float:
    """Smallest input gain magnitude the laws will divide by."""
    return 1e-6 * abs(nominal.f1 / nominal.mass)


# Signum arguments below this magnitude count as zero. Floating-point dust
# (~1e-16 scale) otherwise flips the switching force at full authority
# inside integration stages at an exact fixed point, where the continuous
# law keeps the manifold at rest; every dynamic manifold scale in use is
# at least nine orders of magnitude above this.
_SGN_NOISE_FLOOR = 1e-12


def _sgn(value: float) -> float:
    if value > _SGN_NOISE_FLOOR:
        return 1.0
    if value < -_SGN_NOISE_FLOOR:
        return -1.0
    return 0.0


def _sat(value: float) -> float:
    return max(-1.0, min(1.0, value))


def manifold_q(ref: Reference, x: float, xdot: float, int_exd: float,
               c1: float, c2: float) -> float:
    """Plant sliding manifold S_q."""
    return (ref.xddot - xdot) + c1 * (ref.xd - x) + c2 * int_exd


def manifold_p(ref: Reference, proxy: ProxyState, c1: float, c2: float) -> float:
    """Proxy sliding manifold S_p."""
    return ((ref.xddot - proxy.xpdot) + c1 * (ref.xd - proxy.xp)
            + c2 * proxy.int_exp)


def _gain_or_raise(nominal: PmaParams, x: float, xdot: float,
                   pressure: float, direction: str) -> tuple[float, float]:
    drift, gain = affine_terms(nominal, x, xdot, pressure, direction)
    if abs(gain) < b_floor(nominal):
        raise SingularGainError(x, xdot, gain)
    return drift, gain


def _clamp_output(u_raw: float, nominal: PmaParams, sq: float, sp: float
                  ) -> ControlOutput:
    saturated = u_raw < nominal.p_min or u_raw > nominal.p_max
    u = min(max(u_raw, nominal.p_min), nominal.p_max)
    return ControlOutput(u=u, sq=sq, sp=sp, saturated=saturated)


def ido_psmc(gains: PsmcGains, nominal: PmaParams, ref: Reference, x: float,
             xdot: float, proxy: ProxyState, obs: ObserverState,
             direction: str, pressure: float) -> ControlOutput:
    """Observer-compensated proxy-based sliding mode pressure command.

        u = (1/b) * [xd_ddot + c1*(xd_dot - xdot) + c2*(xd - x) - f
                     + Kp*(xp - x) + Ki*ep + Kd*(xpdot - xdot)
                     - tau_hat - taudot_hat]

    clamped to the actuator limits. ``pressure`` is the previously applied
    command, used only to pick the nominal model's spring branch.
    """
    drift, gain = _gain_or_raise(nominal, x, xdot, pressure, direction)
    numerator = (ref.xdddot
                 + gains.c1 * (ref.xddot - xdot)
                 + gains.c2 * (ref.xd - x)
                 - drift
                 + gains.kp * (proxy.xp - x)
                 + gains.ki * proxy.ep
                 + gains.kd * (proxy.xpdot - xdot)
                 - obs.tau_hat - obs.taudot_hat)
    sq = manifold_q(ref, x, xdot, proxy.int_exd, gains.c1, gains.c2)
    sp = manifold_p(ref, proxy, gains.c1, gains.c2)
    return _clamp_output(numerator / gain, nominal, sq, sp)


_NO_OBSERVER = ObserverState(p1=0.0, p2=0.0)


def psmc(gains: PsmcGains, nominal: PmaParams, ref: Reference, x: float,
         xdot: float, proxy: ProxyState, direction: str, pressure: float
         ) -> ControlOutput:
    """Proxy-based law without disturbance compensation."""
    return ido_psmc(gains, nominal, ref, x, xdot, proxy, _NO_OBSERVER,
                    direction, pressure)


def smc(gains: SmcGains, nominal: PmaParams, ref: Reference, x: float,
        xdot: float, int_exd: float, direction: str, pressure: float
        ) -> ControlOutput:
    """Boundary-layer sliding mode law driving S_q directly.

    The switching term k_sw * sat(S_q / phi) replaces the discontinuous
    signum to soften chattering.
    """
    drift, gain = _gain_or_raise(nominal, x, xdot, pressure, direction)
    sq = manifold_q(ref, x, xdot, int_exd, gains.c1, gains.c2)
    numerator = (ref.xdddot
                 + gains.c1 * (ref.xddot - xdot)
                 + gains.c2 * (ref.xd - x)
                 - drift
                 + gains.k_sw * _sat(sq / gains.phi))
    return _clamp_output(numerator / gain, nominal, sq, float("nan"))


def do_smc(gains: SmcGains, nominal: PmaParams, ref: Reference, x: float,
           xdot: float, int_exd: float, obs: ObserverState, direction: str,
           pressure: float) -> ControlOutput:
    """Sliding mode law with observer compensation added to the bracket."""
    drift, gain = _gain_or_raise(nominal, x, xdot, pressure, direction)
    sq = manifold_q(ref, x, xdot, int_exd, gains.c1, gains.c2)
    numerator = (ref.xdddot
                 + gains.c1 * (ref.xddot - xdot)
                 + gains.c2 * (ref.xd - x)
                 - drift
                 + gains.k_sw * _sat(sq / gains.phi)
                 - obs.tau_hat - obs.taudot_hat)
    return _clamp_output(numerator / gain, nominal, sq, float("nan"))


def proxy_substeps(gains: PsmcGains, dt: float,
                   switch_resolution: float | None = None,
                   max_switch_substeps: int = 128) -> int:
    """RK4 substep count for the proxy over one control period.

    Two requirements size the substep: the linear coupling dynamics must
    stay inside the RK4 stability margin, and the velocity kick of the
    switching force per substep, (gamma/m_p) * h, should stay below
    ``switch_resolution`` so the discrete signum chatter is resolved. The
    switching requirement alone is capped at ``max_switch_substeps``; the
    stability requirement is never capped below what it needs.
    """
    m_p = abs(gains.m_p) if gains.m_p != 0.0 else 1e-12
    stiffness = (abs(gains.c1) + abs(gains.kd) / m_p
                 + math.sqrt(max(abs(gains.c2) + abs(gains.kp) / m_p, 0.0))
                 + abs(gains.ki / m_p) ** (1.0 / 3.0))
    n = int(math.ceil(dt * stiffness / _STABLE_STEP_MARGIN))
    if switch_resolution is not None and switch_resolution > 0.0:
        n_switch = int(math.ceil(dt * abs(gains.gamma) / (m_p * switch_resolution)))
        n = max(n, min(n_switch, max_switch_substeps))
    return min(max(n, 1), _MAX_SUBSTEPS)


def proxy_step(gains: PsmcGains, ref: Reference, x: float, xdot: float,
               proxy: ProxyState, dt: float, substeps: int = 1) -> ProxyState:
    """Advance the proxy and all three integral accumulators one period.

    The proxy acceleration is

        xp_ddot = (Gamma*sgn(S_p) - Kp*(xp - x) - Ki*ep - Kd*(xpdot - xdot)) / m_p
                  + xd_ddot + c1*(xd_dot - xpdot) + c2*(xd - xp)

    with sgn(0) = 0. Measurements and the reference are held over the
    period; ``substeps`` subdivides the RK4 integration so the switching
    term is resolved.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    if not gains.m_p > 0.0:
        raise ValueError(f"proxy mass must be positive, got {gains.m_p}")
    gamma = gains.gamma
    c1, c2 = gains.c1, gains.c2
    kp, ki, kd = gains.kp, gains.ki, gains.kd
    inv_mp = 1.0 / gains.m_p
    xd, xddot, xdddot = ref.xd, ref.xddot, ref.xdddot

    def rates(xp, vp, ep, q_exd, q_exp):
        sp = (xddot - vp) + c1 * (xd - xp) + c2 * q_exp
        acc = (inv_mp * (gamma * _sgn(sp) - kp * (xp - x) - ki * ep
                         - kd * (vp - xdot))
               + xdddot + c1 * (xddot - vp) + c2 * (xd - xp))
        return vp, acc, xp - x, xd - x, xd - xp

    n = min(max(int(substeps), 1), _MAX_SUBSTEPS)
    h = dt / n
    half = 0.5 * h
    sixth = h / 6.0
    xp, vp = proxy.xp, proxy.xpdot
    ep, q_exd, q_exp = proxy.ep, proxy.int_exd, proxy.int_exp
    for _ in range(n):
        k1 = rates(xp, vp, ep, q_exd, q_exp)
        k2 = rates(xp + half * k1[0], vp + half * k1[1], ep + half * k1[2],
                   q_exd + half * k1[3], q_exp + half * k1[4])
        k3 = rates(xp + half * k2[0], vp + half * k2[1], ep + half * k2[2],
                   q_exd + half * k2[3], q_exp + half * k2[4])
        k4 = rates(xp + h * k3[0], vp + h * k3[1], ep + h * k3[2],
                   q_exd + h * k3[3], q_exp + h * k3[4])
        xp = xp + sixth * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
        vp = vp + sixth * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
        ep = ep + sixth * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])
        q_exd = q_exd + sixth * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3])
        q_exp = q_exp + sixth * (k1[4] + 2.0 * k2[4] + 2.0 * k3[4] + k4[4])

    if not (math.isfinite(xp) and math.isfinite(vp) and math.isfinite(ep)):
        raise ProxyDivergedError("proxy state non-finite")
    return ProxyState(xp=xp, xpdot=vp, ep=ep, int_exd=q_exd, int_exp=q_exp)
