import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qtmsradar.signal_model import (
    Covariance4,
    InvalidParamsError,
    PhaseNonzeroError,
    TmnParams,
    TmsvParams,
    block_covariance,
    entanglement_witness,
    squeeze_coefficients,
    squeezed_variances,
    tmn_covariance,
    tmsv_covariance,
    validate_physical,
)

R_VALUES = (0.0, 0.1, 0.5, 1.0, 3.0)


def tmn_matching_tmsv(r, phase=0.0):
    # signal power sinh 2r plus noise e^{-2r} gives total cosh 2r, rho = tanh 2r
    c, s = squeeze_coefficients(r)
    return TmnParams(sigma_sq=s, noise1_sq=math.exp(-2 * r), noise2_sq=math.exp(-2 * r), phase=phase)


class TestSqueezeCoefficients:
    @pytest.mark.parametrize("r", R_VALUES + (1e-9, 10.0))
    def test_matches_hyperbolic(self, r):
        c, s = squeeze_coefficients(r)
        assert c == pytest.approx(math.cosh(2 * r), rel=1e-14)
        assert s == pytest.approx(math.sinh(2 * r), rel=1e-14, abs=1e-300)

    def test_small_r_keeps_relative_precision(self):
        _, s = squeeze_coefficients(1e-12)
        assert s == pytest.approx(2e-12, rel=1e-12)

    @given(st.floats(0.0, 10.0))
    def test_hyperbolic_identity(self, r):
        # c^2 - s^2 cancels; its rounding error scales with c^2
        c, s = squeeze_coefficients(r)
        assert c * c - s * s == pytest.approx(1.0, abs=8 * np.finfo(float).eps * c * c)


class TestTmsvCovariance:
    @pytest.mark.parametrize("r", R_VALUES)
    def test_equals_tmn_with_matched_power(self, r):
        q = tmsv_covariance(TmsvParams(r)).matrix
        t = tmn_covariance(tmn_matching_tmsv(r)).matrix
        np.testing.assert_allclose(q, t, rtol=0, atol=1e-12 * max(1.0, math.cosh(2 * r)))

    @pytest.mark.parametrize("r", R_VALUES)
    def test_block_layout(self, r):
        c, s = math.cosh(2 * r), math.sinh(2 * r)
        ref = np.array([[c, 0, s, 0], [0, c, 0, -s], [s, 0, c, 0], [0, -s, 0, c]])
        np.testing.assert_allclose(tmsv_covariance(TmsvParams(r)).matrix, ref, rtol=1e-14, atol=1e-300)

    @pytest.mark.parametrize("r", R_VALUES)
    def test_squeezed_variances(self, r):
        lo, hi = squeezed_variances(TmsvParams(r))
        assert lo == pytest.approx(math.exp(-2 * r), abs=1e-12)
        assert hi == pytest.approx(math.exp(2 * r), rel=1e-12)

    def test_squeezed_variances_need_zero_phase(self):
        with pytest.raises(PhaseNonzeroError):
            squeezed_variances(TmsvParams(0.5, phase=0.3))

    def test_rho_is_tanh(self):
        assert tmsv_covariance(TmsvParams(0.4)).rho == pytest.approx(math.tanh(0.8), rel=1e-14)

    def test_extra_noise_lowers_rho(self):
        p = TmsvParams(0.5, extra_noise1_sq=2.0, extra_noise2_sq=1.0)
        cov = tmsv_covariance(p)
        assert cov.rho == pytest.approx(p.rho, rel=1e-14)
        assert cov.rho < math.tanh(1.0)

    @pytest.mark.parametrize("bad", [-0.1, math.nan, math.inf])
    def test_rejects_bad_r(self, bad):
        with pytest.raises(InvalidParamsError):
            TmsvParams(bad)


class TestTmnCovariance:
    def test_rho_formula(self):
        p = TmnParams(sigma_sq=2.0, noise1_sq=1.0, noise2_sq=3.0)
        assert p.rho == pytest.approx(((1 + 0.5) * (1 + 1.5)) ** -0.5, rel=1e-15)

    def test_gains_scale_variances_not_rho(self):
        a = tmn_covariance(TmnParams(1.0, 0.5, 0.5))
        b = tmn_covariance(TmnParams(1.0, 0.5, 0.5, gain1=3.0, gain2=0.2))
        assert b.sigma1 == pytest.approx(3.0 * a.sigma1)
        assert b.sigma2 == pytest.approx(0.2 * a.sigma2)
        assert b.rho == pytest.approx(a.rho, rel=1e-14)

    def test_noiseless_is_fully_correlated(self):
        assert tmn_covariance(TmnParams(1.0)).rho == pytest.approx(1.0, rel=1e-15)

    @pytest.mark.parametrize(
        "kw", [dict(sigma_sq=-1.0), dict(sigma_sq=1.0, noise1_sq=-1.0), dict(sigma_sq=math.nan)]
    )
    def test_rejects_bad_params(self, kw):
        with pytest.raises(InvalidParamsError):
            TmnParams(**kw)

    @given(
        st.floats(1e-3, 1e3),
        st.floats(0.0, 1e3),
        st.floats(0.0, 1e3),
        st.floats(-math.pi, math.pi),
    )
    def test_always_physical_in_volts(self, s2, n1, n2, phase):
        cov = tmn_covariance(TmnParams(s2, n1, n2, phase=phase))
        assert validate_physical(cov).psd
        assert 0.0 <= cov.rho <= 1.0 + 1e-12


class TestWitness:
    @pytest.mark.parametrize("r", [0.1, 0.5, 1.0])
    @pytest.mark.parametrize("phase", [0.0, 0.7, -2.0])
    def test_determinant_is_minus_sinh_squared(self, r, phase):
        cov = tmsv_covariance(TmsvParams(r, phase))
        assert entanglement_witness(cov) == pytest.approx(-math.sinh(2 * r) ** 2, rel=1e-12)

    @given(st.floats(0.0, 2.0), st.floats(-math.pi, math.pi))
    def test_phase_invariant(self, r, phase):
        a = entanglement_witness(tmsv_covariance(TmsvParams(r)))
        b = entanglement_witness(tmsv_covariance(TmsvParams(r, phase)))
        assert b == pytest.approx(a, rel=1e-12, abs=1e-15)


class TestValidatePhysical:
    def test_tmsv_satisfies_quantum_bounds(self):
        rep = validate_physical(tmsv_covariance(TmsvParams(0.5)), "vacuum")
        assert rep.ok
        assert rep.min_symplectic_eigenvalue == pytest.approx(1.0, rel=1e-12)

    def test_fully_correlated_tmn_fails_joint_check(self):
        rep = validate_physical(tmn_covariance(TmnParams(1.0)), "vacuum")
        assert rep.psd
        assert rep.joint_uncertainty is False
        assert "uncertainty_joint" in rep.failures()

    def test_indefinite_matrix(self):
        m = np.eye(4)
        m[0, 0] = -1.0
        rep = validate_physical(m)
        assert not rep.psd
        assert rep.failures() == ["psd"]

    def test_unknown_units(self):
        with pytest.raises(ValueError):
            validate_physical(np.eye(4), "watts")


class TestCovariance4:
    def test_rejects_asymmetric(self):
        m = np.eye(4)
        m[0, 1] = 0.5
        with pytest.raises(ValueError):
            Covariance4(m)

    def test_rejects_wrong_shape(self):
        with pytest.raises(ValueError):
            Covariance4(np.eye(3))

    def test_text_round_trip_is_exact(self):
        cov = tmsv_covariance(TmsvParams(0.37, 1.1, 0.2, 0.3))
        assert Covariance4.from_text(cov.to_text()) == cov

    def test_immutable(self):
        cov = block_covariance(1.0, 2.0, 0.5, 0.0)
        with pytest.raises(ValueError):
            cov.matrix[0, 0] = 5.0
