"""Shared fixtures: parameter sets and trace helpers used across the suite."""

import numpy as np
import pytest

from pmalab import PmaParams


@pytest.fixture
def soft_params():
    """Gently damped muscle variant: single-substep RK4 at 1 kHz."""
    return PmaParams(f0=9.81, f1=0.01, k01=5.0, k02=0.0, k11=5.0, k12=0.0,
                     b0i=2.0, b1i=0.0, b0d=2.0, b1d=0.0, mass=1.0,
                     p_break=3.0e5, p_min=0.0, p_max=6.0e5)


@pytest.fixture
def zero_stiffness_params():
    """Pure force-driven variant: constant-coefficient double integrator."""
    return PmaParams(f0=9.81, f1=0.01, k01=0.0, k02=0.0, k11=0.0, k12=0.0,
                     b0i=0.0, b1i=0.0, b0d=0.0, b1d=0.0, mass=1.0,
                     p_break=3.0e5, p_min=0.0, p_max=6.0e5)


@pytest.fixture
def overdamped_params():
    """Overdamped two-pole variant (-10, -40) with a closed-form solution."""
    return PmaParams(f0=9.81, f1=0.0, k01=400.0, k02=0.0, k11=400.0, k12=0.0,
                     b0i=50.0, b1i=0.0, b0d=50.0, b1d=0.0, mass=1.0,
                     p_break=3.0e5, p_min=0.0, p_max=6.0e5)


def coupling_error_norm(trace):
    """Per-sample 1-norm of [ep, ep_dot, ep_ddot] along a proxy-family trace."""
    return (np.abs(trace.ep) + np.abs(trace.xp - trace.x)
            + np.abs(trace.xpdot - trace.xdot))


def manifold_identity_residual(trace, gains):
    """Per-sample |S_p - (S_q - (ep_ddot + c1*ep_dot + c2*ep))|."""
    recon = trace.sq - ((trace.xpdot - trace.xdot)
                        + gains.c1 * (trace.xp - trace.x)
                        + gains.c2 * trace.ep)
    return np.abs(trace.sp - recon)
