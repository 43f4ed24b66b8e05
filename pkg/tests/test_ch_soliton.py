"""Closed-form CH soliton: parametrization, inversion, PDE residual."""

import numpy as np
import pytest

from fch.ch_soliton import ChSolitonParams, q_of_theta, sample_on_grid, xi_of_theta
from fch.grid import forward, inverse, make_grid, spectral_derivative

C2W06 = ChSolitonParams(c=2.0, omega=0.6)


class TestParams:
    def test_theta0_value(self):
        # arctanh(sqrt(0.4))
        assert C2W06.theta0 == pytest.approx(np.arctanh(np.sqrt(0.4)), rel=1e-15)

    def test_rejects_outside_smooth_regime(self):
        with pytest.raises(ValueError):
            ChSolitonParams(c=1.0, omega=0.6)
        with pytest.raises(ValueError):
            ChSolitonParams(c=2.0, omega=0.0)


class TestXiOfTheta:
    def test_zero_at_zero(self):
        assert xi_of_theta(0.0, C2W06) == 0.0

    def test_odd(self):
        rng = np.random.default_rng(1)
        t = rng.uniform(-50, 50, size=200)
        assert np.allclose(xi_of_theta(-t, C2W06), -xi_of_theta(t, C2W06), atol=1e-10)

    def test_asymptotic_slope(self):
        inc = xi_of_theta(60.0, C2W06) - xi_of_theta(50.0, C2W06)
        assert inc / 10.0 == pytest.approx(C2W06.slope, rel=1e-12)

    def test_strictly_increasing(self):
        t = np.linspace(-80, 80, 20001)
        xi = xi_of_theta(t, C2W06)
        assert np.all(np.diff(xi) > 0)

    def test_no_overflow_far_out(self):
        assert np.isfinite(xi_of_theta(1e4, C2W06))


class TestQOfTheta:
    def test_peak(self):
        assert q_of_theta(0.0, C2W06) == pytest.approx(0.8)

    def test_decay(self):
        assert q_of_theta(400.0, C2W06) == 0.0  # underflows cleanly
        assert q_of_theta(40.0, C2W06) < 1e-30

    def test_even(self):
        t = np.linspace(-5, 5, 101)
        assert np.allclose(q_of_theta(t, C2W06), q_of_theta(-t, C2W06), rtol=1e-15)


@pytest.fixture(scope="module")
def sampled():
    grid = make_grid(100.0, 2**16)
    return grid, sample_on_grid(C2W06, grid)


class TestSampleOnGrid:

    def test_peak_at_center(self, sampled):
        grid, q = sampled
        assert q[grid.N // 2] == pytest.approx(0.8, abs=1e-10)
        assert np.argmax(q) == grid.N // 2

    def test_even_profile(self, sampled):
        grid, q = sampled
        mirror = (-np.arange(grid.N)) % grid.N
        assert np.max(np.abs(q - q[mirror])) <= 1e-10

    def test_positive_single_peak(self, sampled):
        grid, q = sampled
        assert np.all(q >= 0)
        right = q[grid.N // 2 :]
        assert np.all(np.diff(right) <= 1e-15)

    def test_traveling_wave_residual(self, sampled):
        # (-c(1 - dxx) + 2w)Q + (3/2)Q^2 - Q Q'' - (1/2)(Q')^2 = 0
        grid, q = sampled
        c, w = C2W06.c, C2W06.omega
        qh = forward(grid, q)
        q1 = inverse(spectral_derivative(qh))
        q2 = inverse(spectral_derivative(spectral_derivative(qh)))
        res = (-c * (q - q2) + 2 * w * q) + 1.5 * q**2 - q * q2 - 0.5 * q1**2
        assert np.max(np.abs(res)) <= 1e-8

    def test_boundary_decay_guard(self):
        with pytest.raises(ValueError):
            sample_on_grid(C2W06, make_grid(3.0, 64))
