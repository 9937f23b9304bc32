"""Second-order nonlinear disturbance observer and its error-bound machinery.

The observer reconstructs the lumped disturbance and its rate from measured
position/velocity and the nominal muscle model:

    tau_hat    = p1 + l1 * xdot
    p1dot      = -l1 * (f + b*u + tau_hat) + taudot_hat
    taudot_hat = p2 + l2 * xdot
    p2dot      = -l2 * (f + b*u + tau_hat)

Its estimation error obeys a linear system edot = A1 e + B1 * tau_ddot with
A1 = [[-l1, 1], [-l2, 0]], B1 = [0, 1]^T, so a Lyapunov equation yields an
ultimate bound on the error norm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NoSolutionError, ObserverDivergedError
from .plant import PmaParams, affine_terms

_STABLE_STEP_MARGIN = 2.0
_MAX_SUBSTEPS = 4096


@dataclass(frozen=True)
class ObserverGains:
    """Gains l1 (1/s) and l2 (1/s^2); both must be strictly positive.

    Positivity is exactly the condition for the error matrix
    [[-l1, 1], [-l2, 0]] to be Hurwitz.
    """

    l1: float
    l2: float

    def __post_init__(self):
        if not (self.l1 > 0.0 and self.l2 > 0.0):
            raise ValueError(
                f"observer gains must be strictly positive for a Hurwitz "
                f"error matrix, got l1={self.l1}, l2={self.l2}"
            )


@dataclass(frozen=True)
class ObserverState:
    """Auxiliary variables and current estimates.

    ``prev_x``/``prev_xdot`` remember the previous measurement so the next
    step can linearly interpolate the model inputs across the sample
    interval instead of holding them, which keeps the discrete estimate
    consistent with the continuous error dynamics.
    """

    p1: float
    p2: float
    tau_hat: float = 0.0
    taudot_hat: float = 0.0
    prev_x: float | None = None
    prev_xdot: float | None = None

    @classmethod
    def initial(cls, gains: ObserverGains, x0: float = 0.0, xdot0: float = 0.0
                ) -> "ObserverState":
        """State with zero initial estimates: p = -l * xdot(0)."""
        return cls(p1=-gains.l1 * xdot0, p2=-gains.l2 * xdot0,
                   tau_hat=0.0, taudot_hat=0.0, prev_x=x0, prev_xdot=xdot0)


def error_matrix(l1: float, l2: float) -> np.ndarray:
    """Estimation-error system matrix [[-l1, 1], [-l2, 0]]."""
    return np.array([[-l1, 1.0], [-l2, 0.0]])


@dataclass(frozen=True)
class SymMatrix2:
    """Symmetric 2x2 matrix, symmetric by construction."""

    xx: float
    xy: float
    yy: float

    @classmethod
    def identity(cls) -> "SymMatrix2":
        return cls(1.0, 0.0, 1.0)

    def as_array(self) -> np.ndarray:
        return np.array([[self.xx, self.xy], [self.xy, self.yy]])

    def eig_bounds(self) -> tuple[float, float]:
        """(smallest, largest) eigenvalue, in closed form."""
        mean = 0.5 * (self.xx + self.yy)
        radius = math.hypot(0.5 * (self.xx - self.yy), self.xy)
        return mean - radius, mean + radius

    @property
    def is_positive_definite(self) -> bool:
        return self.eig_bounds()[0] > 0.0


def solve_lyapunov(a, q: SymMatrix2) -> SymMatrix2:
    """Solve A^T P + P A + Q = 0 for symmetric positive-definite P.

    The three independent scalar equations in (p11, p12, p22) are solved in
    closed form by Cramer's rule. ``a`` may be any Hurwitz 2x2 matrix
    (array-like); ``q`` must be positive definite.
    """
    a = np.asarray(a, dtype=float)
    if a.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {a.shape}")
    tr = a[0, 0] + a[1, 1]
    det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    if not (tr < 0.0 and det > 0.0):
        raise NoSolutionError(
            f"matrix is not Hurwitz (trace={tr:.6g}, det={det:.6g}); "
            f"the Lyapunov equation has no positive-definite solution"
        )
    if not q.is_positive_definite:
        raise ValueError("Q must be positive definite")

    a11, a12 = a[0, 0], a[0, 1]
    a21, a22 = a[1, 0], a[1, 1]
    # Rows: d/d(p11, p12, p22) of entries (1,1), (1,2), (2,2) of A^T P + P A.
    m11, m12, m13 = 2.0 * a11, 2.0 * a21, 0.0
    m21, m22, m23 = a12, a11 + a22, a21
    m31, m32, m33 = 0.0, 2.0 * a12, 2.0 * a22
    r1, r2, r3 = -q.xx, -q.xy, -q.yy

    det_m = (m11 * (m22 * m33 - m23 * m32)
             - m12 * (m21 * m33 - m23 * m31)
             + m13 * (m21 * m32 - m22 * m31))
    if det_m == 0.0:
        raise NoSolutionError("Lyapunov system is singular")
    p11 = (r1 * (m22 * m33 - m23 * m32)
           - m12 * (r2 * m33 - m23 * r3)
           + m13 * (r2 * m32 - m22 * r3)) / det_m
    p12 = (m11 * (r2 * m33 - m23 * r3)
           - r1 * (m21 * m33 - m23 * m31)
           + m13 * (m21 * r3 - r2 * m31)) / det_m
    p22 = (m11 * (m22 * r3 - r2 * m32)
           - m12 * (m21 * r3 - r2 * m31)
           + r1 * (m21 * m32 - m22 * m31)) / det_m

    p = SymMatrix2(p11, p12, p22)
    residual = a.T @ p.as_array() + p.as_array() @ a + q.as_array()
    if np.abs(residual).max() >= 1e-9:
        raise NoSolutionError(
            f"Lyapunov residual {np.abs(residual).max():.3e} exceeds 1e-9"
        )
    return p


def estimation_error_bound(p: SymMatrix2, q: SymMatrix2, eps: float) -> float:
    """Ultimate bound on the estimation-error 1-norm.

    For error dynamics edot = A e + B tau_ddot with |tau_ddot| <= eps and
    A^T P + P A = -Q, the bound is 2 * ||P B||_1 * eps / lambda_min(Q) with
    B = [0, 1]^T.
    """
    if eps < 0.0:
        raise ValueError(f"eps must be non-negative, got {eps}")
    if not p.is_positive_definite:
        raise ValueError("P must be positive definite")
    q_min = q.eig_bounds()[0]
    if q_min <= 0.0:
        raise ValueError("Q must be positive definite")
    pb_norm = abs(p.xy) + abs(p.yy)
    return 2.0 * pb_norm * eps / q_min


def lambda1_bound(gains: ObserverGains, eps: float,
                  q: SymMatrix2 | None = None) -> float:
    """Estimation-error bound for one gain pair and disturbance bound."""
    if q is None:
        q = SymMatrix2.identity()
    p = solve_lyapunov(error_matrix(gains.l1, gains.l2), q)
    return estimation_error_bound(p, q, eps)


def _substeps(gains: ObserverGains, dt: float) -> int:
    # |eigenvalue| of the error matrix is at most max(l1, sqrt(l2)).
    lam = max(gains.l1, math.sqrt(gains.l2))
    n = int(math.ceil(dt * lam / _STABLE_STEP_MARGIN))
    return min(max(n, 1), _MAX_SUBSTEPS)


def observer_step(gains: ObserverGains, obs: ObserverState, x: float,
                  xdot: float, u: float, nominal: PmaParams, direction: str,
                  dt: float) -> ObserverState:
    """Propagate the observer over one completed sample interval.

    ``x``/``xdot`` are the measurements at the end of the interval and ``u``
    the pressure held over it. The auxiliary pair (p1, p2) is integrated
    with RK4, linearly interpolating the model forcing f + b*u and the
    measured velocity between the stored previous sample and the current
    one; the estimates are then recomputed from the fresh measurement.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    l1, l2 = gains.l1, gains.l2

    f1_, b1_ = affine_terms(nominal, x, xdot, u, direction)
    forcing1 = f1_ + b1_ * u
    if obs.prev_x is None or obs.prev_xdot is None:
        forcing0 = forcing1
        xdot0 = xdot
    else:
        f0_, b0_ = affine_terms(nominal, obs.prev_x, obs.prev_xdot, u, direction)
        forcing0 = f0_ + b0_ * u
        xdot0 = obs.prev_xdot

    n = _substeps(gains, dt)
    h = dt / n
    sixth = h / 6.0
    p1 = obs.p1
    p2 = obs.p2
    dF = forcing1 - forcing0
    dV = xdot - xdot0

    def rates(frac: float, q1: float, q2: float) -> tuple[float, float]:
        forcing = forcing0 + dF * frac
        vel = xdot0 + dV * frac
        tau_h = q1 + l1 * vel
        taudot_h = q2 + l2 * vel
        drive = forcing + tau_h
        return -l1 * drive + taudot_h, -l2 * drive

    inv_n = 1.0 / n
    for i in range(n):
        s0 = i * inv_n
        sm = (i + 0.5) * inv_n
        s1 = (i + 1.0) * inv_n
        k1a, k1b = rates(s0, p1, p2)
        k2a, k2b = rates(sm, p1 + 0.5 * h * k1a, p2 + 0.5 * h * k1b)
        k3a, k3b = rates(sm, p1 + 0.5 * h * k2a, p2 + 0.5 * h * k2b)
        k4a, k4b = rates(s1, p1 + h * k3a, p2 + h * k3b)
        p1 = p1 + sixth * (k1a + 2.0 * k2a + 2.0 * k3a + k4a)
        p2 = p2 + sixth * (k1b + 2.0 * k2b + 2.0 * k3b + k4b)

    tau_hat = p1 + l1 * xdot
    taudot_hat = p2 + l2 * xdot
    if not (math.isfinite(tau_hat) and math.isfinite(taudot_hat)):
        raise ObserverDivergedError("observer state non-finite")
    return ObserverState(p1=p1, p2=p2, tau_hat=tau_hat,
                         taudot_hat=taudot_hat, prev_x=x, prev_xdot=xdot)
