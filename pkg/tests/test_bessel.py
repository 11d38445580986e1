import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from qtmsradar.bessel import (
    BesselDomainError,
    bessel_i_ratio,
    bessel_k_ratio,
    log_bessel_i,
    log_bessel_ik,
    log_bessel_k,
)

mpmath.mp.dps = 40

# covers Temme (x < 2), Steed, Hankel and Debye regimes
ORDERS = (0.0, 0.3, 0.5, 1.0, 2.5, 7.0, 20.0, 39.5, 40.0, 41.0, 150.0, 1000.0)
ARGS = (1e-3, 0.1, 1.0, 1.9, 2.0, 5.0, 30.0, 45.0, 200.0, 3000.0)


def mp_log_k(nu, x):
    return float(mpmath.log(mpmath.besselk(nu, x)))


def mp_log_i(nu, x):
    return float(mpmath.log(mpmath.besseli(nu, x)))


def _in_scipy_range(fn, nu, x):
    v = fn(nu, x)
    return 1e-300 < v < math.inf


K_CASES = [(nu, x) for nu in ORDERS for x in ARGS if _in_scipy_range(special.kve, nu, x)]
I_CASES = [(nu, x) for nu in ORDERS for x in ARGS if _in_scipy_range(special.ive, nu, x)]


class TestAgainstScipy:
    @pytest.mark.parametrize("nu, x", K_CASES)
    def test_log_k(self, nu, x):
        ref = math.log(special.kve(nu, x)) - x
        assert log_bessel_k(nu, x) == pytest.approx(ref, rel=1e-12, abs=1e-12)

    @pytest.mark.parametrize("nu, x", I_CASES)
    def test_log_i(self, nu, x):
        ref = math.log(special.ive(nu, x)) + x
        assert log_bessel_i(nu, x) == pytest.approx(ref, rel=1e-12, abs=1e-12)


# (log I, log K) from 25-digit quadrature (K) and power series (I) evaluations
FROZEN_LOG_IK = {
    (1e4, 4e4): (38750.15923138325885822, -38761.47932560777424431),
    (1e5, 4e5): (387556.5327027114531192, -387570.1553820290109124),
    (5e4, 1e7): (9999866.022267818607178, -9999882.833523149969195),
    (1e5, 3.0): (-1010752.711065805651932, 1010740.504993159671758),
}

# K_{nu+1}(x) / K_nu(x) from 34-digit quadrature
FROZEN_K_RATIO = {
    (1e3, 0.5): 4000.0002502502345626,
    (1e3, 3.0): 666.66816816477964626,
    (1e3, 50.0): 40.025009357010170387,
    (1e3, 2e3): 1.6182339887419027133,
    (1e3, 1e6): 1.0010009999992500015,
    (1e5, 0.5): 400000.000002500025,
    (1e5, 3.0): 66666.666681666816665,
    (1e5, 50.0): 4000.0002500024843994,
    (1e5, 2e3): 100.00999910016096492,
    (1e5, 1e6): 1.1049880571614769259,
}


class TestAgainstMpmath:
    @pytest.mark.parametrize("nu, x", [(16, 0.01), (100, 1.0), (3.0, 1e5), (40, 1e-6), (60, 75.0)])
    def test_moderate_orders(self, nu, x):
        li, lk = log_bessel_ik(nu, x)
        assert lk == pytest.approx(mp_log_k(nu, x), rel=1e-13, abs=1e-12)
        assert li == pytest.approx(mp_log_i(nu, x), rel=1e-13, abs=1e-12)

    @pytest.mark.parametrize("nu, x", sorted(FROZEN_LOG_IK))
    def test_extreme_orders(self, nu, x):
        ref_i, ref_k = FROZEN_LOG_IK[nu, x]
        li, lk = log_bessel_ik(nu, x)
        # a couple of ulps of the logarithm, i.e. full relative precision in the value
        assert li == pytest.approx(ref_i, rel=5e-16, abs=1e-12)
        assert lk == pytest.approx(ref_k, rel=5e-16, abs=1e-12)

    def test_reference_values(self):
        # 50-digit references
        assert math.exp(log_bessel_k(1, 1.0)) == pytest.approx(0.60190723019723457473754, rel=1e-14)
        assert math.exp(log_bessel_i(10, 5.0)) == pytest.approx(0.0045800444191760512612, rel=1e-13)


class TestRatios:
    @pytest.mark.parametrize("nu", [0.0, 1.0, 10.0, 39.0, 40.0, 150.0])
    @pytest.mark.parametrize("x", [0.5, 3.0, 50.0, 2e3, 1e6])
    def test_k_ratio(self, nu, x):
        ref = float(mpmath.besselk(nu + 1, x) / mpmath.besselk(nu, x))
        assert bessel_k_ratio(nu, x) == pytest.approx(ref, rel=5e-15)

    @pytest.mark.parametrize("nu, x", sorted(FROZEN_K_RATIO))
    def test_k_ratio_large_order(self, nu, x):
        assert bessel_k_ratio(nu, x) == pytest.approx(FROZEN_K_RATIO[nu, x], rel=5e-15)

    @pytest.mark.parametrize("nu", [0.0, 1.0, 10.0, 1e3])
    @pytest.mark.parametrize("x", [0.5, 3.0, 50.0, 2e3])
    def test_i_ratio(self, nu, x):
        ref = float(mpmath.besseli(nu + 1, x) / mpmath.besseli(nu, x))
        assert bessel_i_ratio(nu, x) == pytest.approx(ref, rel=1e-14)

    def test_i_ratio_at_zero(self):
        assert bessel_i_ratio(3.0, 0.0) == 0.0

    @pytest.mark.parametrize("x", [1e-140, 1e-160, 1e-300, 6.7e-309])
    def test_tiny_argument(self, x):
        assert bessel_i_ratio(0.0, x) == pytest.approx(x / 2, rel=1e-15)
        assert bessel_i_ratio(5.0, x) == pytest.approx(x / 12, rel=1e-15)
        assert log_bessel_i(2.0, x) == pytest.approx(2 * math.log(x / 2) - math.log(2), rel=1e-15)


class TestIdentities:
    @given(st.floats(0.0, 200.0), st.floats(1e-2, 1e4))
    @settings(max_examples=200, deadline=None)
    def test_wronskian(self, nu, x):
        # I_nu K_{nu+1} + I_{nu+1} K_nu = 1/x
        li0, lk0 = log_bessel_ik(nu, x)
        li1, lk1 = log_bessel_ik(nu + 1, x)
        w = math.exp(li0 + lk1 + math.log(x)) + math.exp(li1 + lk0 + math.log(x))
        assert w == pytest.approx(1.0, rel=1e-10)

    @given(st.floats(0.0, 100.0), st.floats(1e-2, 1e3))
    @settings(max_examples=150, deadline=None)
    def test_k_increasing_in_order(self, nu, x):
        assert log_bessel_k(nu + 1, x) >= log_bessel_k(nu, x)

    @given(st.floats(1.0, 100.0), st.floats(1e-2, 1e3))
    @settings(max_examples=150, deadline=None)
    def test_k_recurrence(self, nu, x):
        # K_{nu+1} = K_{nu-1} + (2 nu / x) K_nu
        lhs = math.exp(log_bessel_k(nu + 1, x) - log_bessel_k(nu, x))
        rhs = math.exp(log_bessel_k(nu - 1, x) - log_bessel_k(nu, x)) + 2 * nu / x
        assert lhs == pytest.approx(rhs, rel=1e-11)

    def test_regime_boundaries_continuous(self):
        for nu in (39.999999, 40.0):
            assert log_bessel_k(nu, 10.0) == pytest.approx(mp_log_k(nu, 10.0), rel=1e-13)
        for x in (39.999999, 40.0, 40.000001):
            assert log_bessel_k(2.0, x) == pytest.approx(mp_log_k(2.0, x), rel=1e-13)


class TestDomain:
    @pytest.mark.parametrize("nu, x", [(-1.0, 1.0), (1.0, -1.0), (1.0, 0.0), (math.nan, 1.0), (1.0, math.inf)])
    def test_k_errors(self, nu, x):
        with pytest.raises(BesselDomainError):
            log_bessel_k(nu, x)

    def test_i_at_zero(self):
        assert log_bessel_i(0, 0.0) == 0.0
        assert log_bessel_i(2, 0.0) == -math.inf

    def test_domain_error_is_value_error(self):
        assert issubclass(BesselDomainError, ValueError)

    def test_no_overflow_at_huge_order(self):
        v = log_bessel_k(1e6, 1.0)
        assert np.isfinite(v) and v > 1e7
