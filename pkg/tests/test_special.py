import math

import numpy as np
import pytest

from hyperasym.errors import GammaPoleError, NonConvergenceError
from hyperasym.special import (
    KernelParams,
    ecalle_kernel,
    ecalle_kernel_q2,
    gamma_moment,
    gamma_real,
    kernel_decay_envelope,
    kernel_moment_quadrature,
    kernel_values,
    ml_derivative_kernel,
    mittag_leffler,
)

SQRT_PI = math.sqrt(math.pi)


class TestGamma:
    def test_values(self):
        assert gamma_real(1.0) == pytest.approx(1.0, rel=1e-13)
        assert gamma_real(0.5) == pytest.approx(SQRT_PI, rel=1e-13)
        assert gamma_real(5.0) == pytest.approx(24.0, rel=1e-13)

    def test_poles_rejected(self):
        for x in (0.0, -1.0, -7.0):
            with pytest.raises(GammaPoleError):
                gamma_real(x)

    def test_reflection_region(self):
        assert gamma_real(-0.5) == pytest.approx(-2.0 * SQRT_PI, rel=1e-12)


class TestMittagLeffler:
    def test_order_one_is_exp(self):
        rng = np.random.default_rng(1)
        for _ in range(40):
            z = complex(rng.uniform(-10, 10), rng.uniform(-10, 10))
            if abs(z) > 10:
                continue
            assert mittag_leffler(1, z) == pytest.approx(np.exp(z), rel=1e-12, abs=1e-12)

    def test_order_two_is_cosh_sqrt(self):
        # series oracle: sum 1/Gamma(1+2n) at z=1 equals cosh(1)
        assert mittag_leffler(2, 1.0) == pytest.approx(math.cosh(1.0), rel=1e-12)
        assert mittag_leffler(2, 0.0) == pytest.approx(1.0, abs=1e-15)
        for z in (9.0, -4.0, 2.0 + 3.0j):
            want = np.cosh(np.sqrt(complex(z)))
            assert mittag_leffler(2, z) == pytest.approx(want, rel=1e-11)

    def test_large_argument_integer_order(self):
        # exponential-sum continuation agrees with cosh closed form
        z = 900.0
        assert mittag_leffler(2, z) == pytest.approx(np.cosh(np.sqrt(z)), rel=1e-12)

    def test_large_argument_fractional_order_reported(self):
        with pytest.raises(NonConvergenceError):
            mittag_leffler(1.5, 1e4)

    def test_invalid_order(self):
        with pytest.raises(ValueError):
            mittag_leffler(0, 1.0)


class TestDerivativeKernel:
    def test_beta_one_is_mittag_leffler(self):
        for x in (0.3, -2.0, 5.0 + 1.0j, 200.0):
            want = mittag_leffler(2, x)
            assert ml_derivative_kernel(2, 1, x) == pytest.approx(want, rel=1e-11)

    def test_beta_two_series(self):
        # sum_n n x^n / (2n)! checked against a direct partial sum
        x = 1.7
        direct = sum(n * x**n / math.factorial(2 * n) for n in range(1, 60))
        assert ml_derivative_kernel(2, 2, x) == pytest.approx(direct, rel=1e-12)

    def test_beta_two_large_argument(self):
        # (x^1/1!) d/dx E_2(x) = sqrt(x) sinh(sqrt(x)) / 2
        x = 400.0
        want = math.sqrt(x) * math.sinh(math.sqrt(x)) / 2.0
        assert ml_derivative_kernel(2, 2, x) == pytest.approx(want, rel=1e-11)

    def test_at_zero(self):
        assert ml_derivative_kernel(2, 1, 0.0) == pytest.approx(1.0)
        assert ml_derivative_kernel(2, 2, 0.0) == pytest.approx(0.0, abs=1e-15)
        assert ml_derivative_kernel(3, 3, 0.0) == pytest.approx(0.0, abs=1e-15)


class TestEcalleKernel:
    def test_order_two_special_values(self):
        assert ecalle_kernel(2, 0.0).real == pytest.approx(1 / SQRT_PI, rel=1e-12)
        assert ecalle_kernel(2, 1.0).real == pytest.approx(math.exp(-0.25) / SQRT_PI, rel=1e-12)
        assert ecalle_kernel(2, 2.0).real == pytest.approx(math.exp(-1.0) / SQRT_PI, rel=1e-12)

    def test_closed_form_on_grid(self):
        taus = np.arange(0.0, 6.0 + 1e-12, 0.01)
        series = kernel_values(KernelParams.from_q(2), taus, tol=1e-12, force_series=True)
        closed = np.real(ecalle_kernel_q2(taus))
        assert np.max(np.abs(series - closed)) <= 1e-10

    @pytest.mark.parametrize("q", [2, 3])
    def test_decay_bound(self, q):
        params = KernelParams.from_q(q)
        taus = np.linspace(0.0, 6.0, 121)
        vals = np.abs(kernel_values(params, taus, tol=1e-12, force_series=True))
        envelope = kernel_decay_envelope(params, taus)
        fitted_c = np.max(vals / envelope)
        assert fitted_c <= 2.0

    def test_alpha_at_most_one_rejected(self):
        with pytest.raises(ValueError):
            ecalle_kernel(1, 0.5)
        with pytest.raises(ValueError):
            ecalle_kernel(0.7, 0.5)

    def test_c_q_values(self):
        assert KernelParams.from_q(2).c_q == pytest.approx(4.0, rel=1e-15)
        assert KernelParams.from_q(3).c_q == pytest.approx(3.0 * math.sqrt(3.0) / 2.0, rel=1e-14)


class TestMoments:
    def test_trivial(self):
        assert gamma_moment(0, 2, 0.1, 0.0) == pytest.approx(1.0)
        assert gamma_moment(1, 2, 0.1, 0.0) == pytest.approx(0.2)
        # Gamma(5)/2! * 0.01 * e^{-2 pi i}
        assert gamma_moment(2, 2, 0.1, math.pi) == pytest.approx(0.12, rel=1e-13)

    @pytest.mark.parametrize("l", range(0, 11, 2))
    def test_quadrature_matches_gamma_ratio(self, l):
        params = KernelParams.from_q(2)
        quad = kernel_moment_quadrature(params, l, tol=1e-10)
        want = math.exp(
            math.lgamma(1.0 + 2 * l) - math.lgamma(l + 1.0)
        )
        assert quad == pytest.approx(want, rel=1e-8)

    def test_q3_moment(self):
        params = KernelParams.from_q(3)
        quad = kernel_moment_quadrature(params, 1, tol=1e-9)
        want = math.gamma(4.0)  # Gamma(1+3)/1!
        assert quad == pytest.approx(want, rel=1e-8)
