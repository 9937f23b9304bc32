"""Feasibility gate for proxy-based gain sets.

A gain set keeps the coupled proxy/plant error uniformly ultimately bounded
when four conditions hold:

    m_p > 0
    K_c positive definite
    Gamma >= lambda2 * (Kp + Ki + Kd)
    varpi = Kp*c1 - Ki - Kd*c2 > 0

with K_m = diag(Ki*c2, varpi, Kd), K_c the symmetric coupling matrix below,
and lambda2 = (eps + lambda1) * (c1 + c2 + 1) / lambda_min(K_m) the ultimate
bound on the 1-norm of the proxy-plant coupling error vector
[ep, ep_dot, ep_ddot].
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .control import PsmcGains
from .errors import InfeasibleGainsError
from .observer import SymMatrix2

VIOLATION_PROXY_MASS = "proxy mass"
VIOLATION_KC = "K_c positive definiteness"
VIOLATION_GAMMA = "switching gain"
VIOLATION_VARPI = "ϖ positivity"
# Only reachable with non-positive Ki, Kd or c2; the four named conditions
# cannot see a K_m diagonal going negative through those entries.
VIOLATION_KM = "K_m positivity"


@dataclass(frozen=True)
class StabilityReport:
    """Outcome of the feasibility gate for one gain set."""

    feasible: bool
    varpi: float
    kc_eigs: tuple[float, float]
    km_min: float
    eps: float
    lambda1: float
    lambda2: float | None
    gamma_required: float | None
    violations: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.feasible != (len(self.violations) == 0):
            raise ValueError("feasible flag must mirror an empty violation list")

    def to_kv(self) -> dict[str, str]:
        """Flat key/value view for the run-summary file."""
        return {
            "stability.feasible": str(self.feasible).lower(),
            "stability.varpi": repr(self.varpi),
            "stability.kc_eig_min": repr(self.kc_eigs[0]),
            "stability.kc_eig_max": repr(self.kc_eigs[1]),
            "stability.km_min": repr(self.km_min),
            "stability.eps": repr(self.eps),
            "stability.lambda1": repr(self.lambda1),
            "stability.lambda2": "" if self.lambda2 is None else repr(self.lambda2),
            "stability.gamma_required": (
                "" if self.gamma_required is None else repr(self.gamma_required)
            ),
            "stability.violations": "; ".join(self.violations),
        }


def varpi(gains: PsmcGains) -> float:
    """The scalar Kp*c1 - Ki - Kd*c2."""
    return gains.kp * gains.c1 - gains.ki - gains.kd * gains.c2


def km_matrix(gains: PsmcGains) -> np.ndarray:
    """Diagonal matrix diag(Ki*c2, varpi, Kd)."""
    return np.diag([gains.ki * gains.c2, varpi(gains), gains.kd])


def kc_matrix(gains: PsmcGains) -> SymMatrix2:
    """Symmetric coupling matrix of the virtual-coupling energy."""
    return SymMatrix2(
        xx=gains.kp * gains.c2 + gains.ki * gains.c1,
        xy=gains.ki + gains.kd * gains.c2,
        yy=gains.kp + gains.kd * gains.c1,
    )


def _km_min(gains: PsmcGains) -> float:
    return min(gains.ki * gains.c2, varpi(gains), gains.kd)


def lambda2(gains: PsmcGains, eps: float, lambda1: float) -> float:
    """Ultimate bound on the coupling-error 1-norm.

    Raises when lambda_min(K_m) is not positive, in which case no bound
    exists for the gain set.
    """
    km_min = _km_min(gains)
    if km_min <= 0.0:
        raise InfeasibleGainsError(
            f"lambda_min(K_m)={km_min:.6g} is not positive; no ultimate bound"
        )
    return (eps + lambda1) * (gains.c1 + gains.c2 + 1.0) / km_min


def sq_asymptotic_bound(gains: PsmcGains, eps: float, lambda1: float) -> float:
    """Large-proxy-mass limit of the plant manifold bound: lambda2*(c1+c2+1)."""
    return lambda2(gains, eps, lambda1) * (gains.c1 + gains.c2 + 1.0)


def check_feasibility(gains: PsmcGains, eps: float, lambda1: float
                      ) -> StabilityReport:
    """Evaluate all feasibility conditions and name each violation.

    The switching-gain condition needs lambda2 and is therefore skipped
    (neither passed nor violated) when lambda_min(K_m) <= 0; the varpi or
    K_m violation already marks such gain sets infeasible.
    """
    w = varpi(gains)
    kc = kc_matrix(gains)
    kc_eigs = kc.eig_bounds()
    km_min = _km_min(gains)

    violations: list[str] = []
    if not gains.m_p > 0.0:
        violations.append(VIOLATION_PROXY_MASS)
    if not kc_eigs[0] > 0.0:
        violations.append(VIOLATION_KC)
    if not w > 0.0:
        violations.append(VIOLATION_VARPI)
    elif km_min <= 0.0:
        violations.append(VIOLATION_KM)

    lam2: float | None = None
    gamma_required: float | None = None
    if km_min > 0.0:
        lam2 = (eps + lambda1) * (gains.c1 + gains.c2 + 1.0) / km_min
        gamma_required = lam2 * (gains.kp + gains.ki + gains.kd)
        if not gains.gamma >= gamma_required:
            violations.append(VIOLATION_GAMMA)

    return StabilityReport(
        feasible=not violations,
        varpi=w,
        kc_eigs=kc_eigs,
        km_min=km_min,
        eps=eps,
        lambda1=lambda1,
        lambda2=lam2,
        gamma_required=gamma_required,
        violations=tuple(violations),
    )
