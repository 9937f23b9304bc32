"""Muscle model: coefficients, acceleration, stepping, disturbances."""

import math

import numpy as np
import pytest

from pmalab import (DisturbanceProfile, IDENTIFIED_PMA,
                    IntegrationDivergedError, PlantState, PmaParams,
                    acceleration, affine_terms, coefficients, step)
from pmalab.plant import (DEFLATING, GRAVITY, INFLATING, next_direction,
                          stable_substeps)


class TestCoefficients:
    def test_printed_values_at_zero_pressure(self):
        c = coefficients(IDENTIFIED_PMA, 0.0, INFLATING)
        assert c.b == pytest.approx(6435.31)
        assert c.k == pytest.approx(18063.0)
        assert c.f == pytest.approx(-202.32)

    def test_linear_formula_at_one_bar(self):
        c = coefficients(IDENTIFIED_PMA, 1.0e5, INFLATING)
        assert c.b == pytest.approx(16458.31, rel=1e-12)
        assert c.k == pytest.approx(19114.0, rel=1e-12)
        assert c.f == pytest.approx(518.68, rel=1e-12)

    def test_zero_gain_case_returns_offsets(self):
        params = PmaParams(b1i=0.0, k02=0.0, f1=0.0)
        c = coefficients(params, 2.0e5, INFLATING)
        assert (c.b, c.k, c.f) == (params.b0i, params.k01, params.f0)

    def test_deflating_branch(self):
        c = coefficients(IDENTIFIED_PMA, 1.0e5, DEFLATING)
        assert c.b == pytest.approx(2522.01 + 0.00321 * 1.0e5, rel=1e-12)

    def test_breakpoint_branch_selection(self):
        p = IDENTIFIED_PMA
        at_break = coefficients(p, p.p_break, INFLATING)
        above = coefficients(p, p.p_break + 1.0, INFLATING)
        assert at_break.k == pytest.approx(p.k01 + p.k02 * p.p_break, rel=1e-12)
        assert above.k == pytest.approx(p.k11 + p.k12 * (p.p_break + 1.0),
                                        rel=1e-12)

    def test_pressure_outside_limits_rejected(self):
        with pytest.raises(ValueError):
            coefficients(IDENTIFIED_PMA, -1.0, INFLATING)
        with pytest.raises(ValueError):
            coefficients(IDENTIFIED_PMA, 6.0e5 + 1.0, INFLATING)

    def test_unknown_direction_rejected(self):
        with pytest.raises(ValueError):
            coefficients(IDENTIFIED_PMA, 0.0, "sideways")


class TestAcceleration:
    def test_rest_at_origin(self):
        a = acceleration(IDENTIFIED_PMA, PlantState(), 0.0, INFLATING)
        assert a == pytest.approx((-202.32 - 9.81) / 1.0, abs=1e-12)

    def test_force_balance_gives_zero(self):
        params = PmaParams(f0=2.0 * GRAVITY, f1=0.0, mass=2.0)
        a = acceleration(params, PlantState(), 1.0e5, INFLATING)
        assert a == pytest.approx(0.0, abs=1e-15)

    def test_disturbance_is_additive(self):
        a = acceleration(IDENTIFIED_PMA, PlantState(), 0.0, INFLATING,
                         disturbance=5.0)
        assert a == pytest.approx(-207.13, abs=1e-12)


class TestAffineTerms:
    def test_matches_coefficient_form(self):
        # f(x, xdot) + b(x, xdot)*P must equal the rearranged coefficient form
        p = IDENTIFIED_PMA
        rng = np.random.default_rng(7)
        for _ in range(50):
            x = rng.uniform(0.0, 0.05)
            xdot = rng.uniform(-0.05, 0.05)
            pressure = rng.uniform(0.0, 6.0e5)
            direction = INFLATING if rng.random() < 0.5 else DEFLATING
            drift, gain = affine_terms(p, x, xdot, pressure, direction)
            c = coefficients(p, pressure, direction)
            direct = (c.f - p.mass * GRAVITY - c.b * xdot - c.k * x) / p.mass
            assert drift + gain * pressure == pytest.approx(direct, rel=1e-12)


class TestDisturbanceProfile:
    def test_eps_sinusoid_dominated_by_curvature(self):
        d = DisturbanceProfile.sinusoid(0.1, 2.0)
        assert d.eps() == pytest.approx(0.4)

    def test_eps_slow_sinusoid_dominated_by_level(self):
        d = DisturbanceProfile.sinusoid(0.3, 0.5)
        assert d.eps() == pytest.approx(0.3)

    def test_constant_and_zero(self):
        assert DisturbanceProfile.constant(-2.5).eps() == 2.5
        assert DisturbanceProfile.constant(-2.5).deriv(3.0) == 0.0
        assert DisturbanceProfile.zero().eval(11.0) == 0.0
        assert DisturbanceProfile.zero().eps() == 0.0

    def test_sum_of_sinusoids_eps(self):
        d = DisturbanceProfile.sum_of_sinusoids((1.0, 0.5), (0.5, 3.0))
        assert d.eps() == pytest.approx(0.25 + 4.5)

    def test_derivatives_match_finite_differences(self):
        d = DisturbanceProfile.sum_of_sinusoids((0.7, 0.2), (1.3, 4.0),
                                                (0.4, -0.9))
        h = 1e-6
        for t in (0.0, 0.37, 2.9):
            fd1 = (d.eval(t + h) - d.eval(t - h)) / (2 * h)
            fd2 = (d.deriv(t + h) - d.deriv(t - h)) / (2 * h)
            assert d.deriv(t) == pytest.approx(fd1, abs=1e-6)
            assert d.deriv2(t) == pytest.approx(fd2, abs=1e-6)

    def test_validation(self):
        with pytest.raises(ValueError):
            DisturbanceProfile("noise")
        with pytest.raises(ValueError):
            DisturbanceProfile("sinusoid", (1.0, 2.0), (1.0, 2.0), (0.0, 0.0))
        with pytest.raises(ValueError):
            DisturbanceProfile("sum-of-sinusoids", (1.0,), (1.0, 2.0), (0.0,))


class TestParamsValidation:
    def test_mass_must_be_positive(self):
        with pytest.raises(ValueError):
            PmaParams(mass=0.0)

    def test_pressure_limits_ordering(self):
        with pytest.raises(ValueError):
            PmaParams(p_min=-1.0)
        with pytest.raises(ValueError):
            PmaParams(p_min=2.0e5, p_max=1.0e5, p_break=1.5e5)

    def test_breakpoint_inside_limits(self):
        with pytest.raises(ValueError):
            PmaParams(p_break=7.0e5)
        with pytest.raises(ValueError):
            PmaParams(p_break=0.0)

    def test_scaled_touches_only_coefficients(self):
        scaled = IDENTIFIED_PMA.scaled(1.2)
        assert scaled.f0 == pytest.approx(1.2 * IDENTIFIED_PMA.f0)
        assert scaled.b1d == pytest.approx(1.2 * IDENTIFIED_PMA.b1d)
        assert scaled.mass == IDENTIFIED_PMA.mass
        assert scaled.p_break == IDENTIFIED_PMA.p_break

    def test_with_extra_mass(self):
        assert IDENTIFIED_PMA.with_extra_mass(2.5).mass == pytest.approx(3.5)


class TestDirectionDetector:
    def test_deadband_keeps_previous(self):
        assert next_direction(DEFLATING, 1000.0, 1000.5) == DEFLATING
        assert next_direction(INFLATING, 1000.0, 999.5) == INFLATING

    def test_switches_outside_deadband(self):
        assert next_direction(DEFLATING, 1000.0, 1002.0) == INFLATING
        assert next_direction(INFLATING, 1000.0, 998.0) == DEFLATING


class TestStep:
    def test_equilibrium_state_unchanged(self):
        # force balance at any pressure when f1 = 0 and f0 = m*g
        params = PmaParams(f0=GRAVITY, f1=0.0, k01=0.0, k02=0.0, k11=0.0,
                           k12=0.0, b0i=0.0, b1i=0.0, b0d=0.0, b1d=0.0,
                           mass=1.0, p_break=3.0e5)
        state = PlantState(x=0.004, xdot=0.0)
        out = step(params, state, 2.0e5, DisturbanceProfile.zero(), 1e-3)
        assert out.x == state.x
        assert out.xdot == state.xdot
        assert out.t == pytest.approx(1e-3)

    def test_saturation_clamps_command(self, soft_params):
        state = PlantState()
        dist = DisturbanceProfile.zero()
        a = step(soft_params, state, 1.0e7, dist, 1e-3)
        b = step(soft_params, state, soft_params.p_max, dist, 1e-3)
        assert a == b
        assert a.p_prev == soft_params.p_max

    def test_determinism(self, soft_params):
        dist = DisturbanceProfile.sinusoid(0.5, 3.0)

        def run():
            s = PlantState()
            for k in range(500):
                s = step(soft_params, s, 1.0e5 + 100.0 * (k % 7), dist, 1e-3)
            return s

        assert run() == run()

    def test_dt_must_be_positive(self, soft_params):
        with pytest.raises(ValueError):
            step(soft_params, PlantState(), 1.0e5,
                 DisturbanceProfile.zero(), 0.0)

    def test_command_must_be_finite(self, soft_params):
        with pytest.raises(ValueError):
            step(soft_params, PlantState(), math.nan,
                 DisturbanceProfile.zero(), 1e-3)

    def test_divergence_raises_with_time(self):
        unstable = PmaParams(f0=9.81, f1=0.0, k01=-1.0e8, k02=0.0,
                             k11=-1.0e8, k12=0.0, b0i=1.0, b1i=0.0,
                             b0d=1.0, b1d=0.0, mass=1.0,
                             p_break=3.0e5)
        state = PlantState(x=1e-6)
        with pytest.raises(IntegrationDivergedError) as err:
            for _ in range(5000):
                state = step(unstable, state, 1.0e5,
                             DisturbanceProfile.zero(), 1e-3)
        assert err.value.t is not None and err.value.t > 0.0

    def test_stiff_coefficients_get_substeps(self):
        n = stable_substeps(IDENTIFIED_PMA, 1.0e5, INFLATING, 1e-3)
        assert n >= 8  # |b/m| ~ 16458 at 1 bar, margin 2
        soft = PmaParams(f0=9.81, f1=0.01, k01=5.0, k02=0.0, k11=5.0,
                         k12=0.0, b0i=2.0, b1i=0.0, b0d=2.0, b1d=0.0,
                         mass=1.0, p_break=3.0e5)
        assert stable_substeps(soft, 1.0e5, INFLATING, 1e-3) == 1

    def test_stiff_step_remains_stable(self):
        # the printed coefficients are integrable at 1 kHz thanks to substeps
        state = PlantState()
        dist = DisturbanceProfile.sinusoid(0.1, 2.0)
        for _ in range(2000):
            state = step(IDENTIFIED_PMA, state, 1.0e5, dist, 1e-3)
        assert abs(state.x) < 0.2
        assert math.isfinite(state.xdot)


def analytic_overdamped_solution(params, pressure, amp, omega, t,
                                 x0=0.0, v0=0.0):
    """Closed-form x(t) for constant coefficients and sinusoidal forcing.

    Solves xddot + B xdot + K x = G0 + amp*sin(omega*t) with real roots;
    independent of the integrator under test.
    """
    c = coefficients(params, pressure, INFLATING)
    m = params.mass
    big_b = c.b / m
    big_k = c.k / m
    g0 = (c.f - m * GRAVITY) / m
    den = (big_k - omega ** 2) ** 2 + (big_b * omega) ** 2
    cs = amp * (big_k - omega ** 2) / den
    cc = -amp * big_b * omega / den
    disc = big_b ** 2 - 4.0 * big_k
    assert disc > 0.0, "test parameters must be overdamped"
    r1 = 0.5 * (-big_b + math.sqrt(disc))
    r2 = 0.5 * (-big_b - math.sqrt(disc))
    x_part0 = g0 / big_k + cc
    v_part0 = cs * omega
    alpha = ((v0 - v_part0) - r2 * (x0 - x_part0)) / (r1 - r2)
    beta = (x0 - x_part0) - alpha
    return (g0 / big_k + cs * math.sin(omega * t) + cc * math.cos(omega * t)
            + alpha * math.exp(r1 * t) + beta * math.exp(r2 * t))


class TestIntegratorAccuracy:
    def test_fine_euler_agreement(self, overdamped_params):
        # 1 s at dt = 1e-3 against a forward-Euler oracle at dt = 1e-6
        params = overdamped_params
        dist = DisturbanceProfile.sinusoid(0.2, 2.0)
        pressure = 1.0e5
        state = PlantState()
        for _ in range(1000):
            state = step(params, state, pressure, dist, 1e-3)

        c = coefficients(params, pressure, INFLATING)
        m = params.mass
        drift = (c.f - m * GRAVITY) / m
        bm = c.b / m
        km = c.k / m
        x = 0.0
        v = 0.0
        h = 1e-6
        ev = dist.eval
        for k in range(1000000):
            a = drift - bm * v - km * x + ev(k * h)
            x += h * v
            v += h * a
        assert abs(state.x - x) < 1e-6

    def test_fourth_order_convergence(self, overdamped_params):
        # halving dt shrinks the terminal error against the closed-form
        # solution by at least 8x on a smooth single-substep scenario
        params = overdamped_params
        amp, omega = 5.0, 12.0
        dist = DisturbanceProfile.sinusoid(amp, omega)
        pressure = 1.0e5

        def terminal_error(dt):
            state = PlantState()
            n = int(round(1.0 / dt))
            for _ in range(n):
                state = step(params, state, pressure, dist, dt)
            exact = analytic_overdamped_solution(params, pressure, amp,
                                                 omega, 1.0)
            return abs(state.x - exact)

        err_coarse = terminal_error(1e-3)
        err_fine = terminal_error(5e-4)
        assert err_coarse > 1e-13  # above rounding, so the ratio is meaningful
        assert err_coarse / err_fine >= 8.0
