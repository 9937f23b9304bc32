"""Exception types shared across the simulation stack."""

from __future__ import annotations


class ConfigError(ValueError):
    """A scenario, gains, or tuner configuration is invalid."""


class SimulationDivergedError(RuntimeError):
    """A simulated state became non-finite.

    ``t`` records the simulation time at which the blow-up was detected,
    when the failing component tracks absolute time.
    """

    def __init__(self, message: str, t: float | None = None):
        if t is not None:
            message = f"{message} at t={t:.6f} s"
        super().__init__(message)
        self.t = t


class IntegrationDivergedError(SimulationDivergedError):
    """Plant state became non-finite during integration."""


class ObserverDivergedError(SimulationDivergedError):
    """Disturbance observer state became non-finite."""


class ProxyDivergedError(SimulationDivergedError):
    """Proxy state became non-finite."""


class SingularGainError(RuntimeError):
    """The model input gain b(x, xdot) is too close to zero to divide by."""

    def __init__(self, x: float, xdot: float, gain: float):
        super().__init__(
            f"input gain b(x, xdot)={gain:.6e} below floor at x={x:.6f} m, "
            f"xdot={xdot:.6f} m/s"
        )
        self.x = x
        self.xdot = xdot
        self.gain = gain


class InfeasibleGainsError(ValueError):
    """A gain set fails the closed-loop feasibility conditions."""


class NoSolutionError(ValueError):
    """The Lyapunov equation has no positive-definite solution."""


class BudgetExhaustedError(RuntimeError):
    """The tuner found no feasible candidate within its generation budget."""

    def __init__(self, message: str, best_infeasible=None):
        super().__init__(message)
        self.best_infeasible = best_infeasible
