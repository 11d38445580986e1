import math
import warnings
from dataclasses import dataclass

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qtmsradar.detectors import DetectorSeries
from qtmsradar.roc import (
    GainNonconvergence,
    MismatchedSeriesError,
    ResolutionWarning,
    RocCurve,
    RocSchemaError,
    SimulatedConfig,
    UnresolvablePfaError,
    gain_grid,
    integration_gain,
    pd_at_pfa,
    read_roc_csv,
    roc_from_series,
    summarize,
    write_hist_csv,
    write_roc_csv,
)
from qtmsradar.sampler import off_covariance
from qtmsradar.signal_model import TmnParams, tmn_covariance


def series(values, condition, k=1, n=10):
    return DetectorSeries(k, np.asarray(values, dtype=float), condition, n)


class TestRocFromSeries:
    def test_small_example(self):
        curve = roc_from_series(series([2, 3, 4], "on"), series([1, 2, 3], "off"))
        np.testing.assert_array_equal(curve.thresholds, [-np.inf, 1, 2, 3, 4])
        np.testing.assert_allclose(curve.p_fa, [1, 2 / 3, 1 / 3, 0, 0])
        np.testing.assert_allclose(curve.p_d, [1, 1, 2 / 3, 1 / 3, 0])
        assert curve.n_windows_on == 3 and curve.n_windows_off == 3

    def test_exceedance_is_strict(self):
        curve = roc_from_series(series([5, 5], "on"), series([5], "off"))
        i = int(np.flatnonzero(curve.thresholds == 5)[0])
        assert curve.p_d[i] == 0.0 and curve.p_fa[i] == 0.0

    @given(
        st.lists(st.floats(-10, 10), min_size=1, max_size=60),
        st.lists(st.floats(-10, 10), min_size=1, max_size=60),
    )
    @settings(max_examples=80)
    def test_monotone_and_ends(self, on, off):
        curve = roc_from_series(series(on, "on"), series(off, "off"))
        assert curve.is_monotone()
        assert curve.p_fa[0] == 1.0 and curve.p_d[0] == 1.0
        assert curve.p_fa[-1] == 0.0 and curve.p_d[-1] == 0.0
        assert 0.0 <= curve.auc() <= 1.0

    def test_auc_matches_mann_whitney(self):
        rng = np.random.default_rng(0)
        on = rng.normal(1.0, 1.0, 400)
        off = rng.normal(0.0, 1.0, 300)
        curve = roc_from_series(series(on, "on"), series(off, "off"))
        u = np.mean(on[:, None] > off[None, :])
        assert curve.auc() == pytest.approx(u, rel=1e-12)

    def test_mismatch(self):
        with pytest.raises(MismatchedSeriesError):
            roc_from_series(series([1], "on", k=1), series([1], "off", k=3))
        with pytest.raises(MismatchedSeriesError):
            roc_from_series(series([1], "on", n=10), series([1], "off", n=20))

    def test_standard_error(self):
        curve = roc_from_series(series(np.arange(100), "on"), series(np.arange(100), "off"))
        assert curve.pd_standard_error(0.5) == pytest.approx(0.05)


class TestPdAtPfa:
    @pytest.fixture
    def curve(self):
        rng = np.random.default_rng(1)
        return roc_from_series(series(rng.normal(1, 1, 1000), "on"), series(rng.normal(0, 1, 1000), "off"))

    def test_exact_level(self, curve):
        i = int(np.argmin(np.abs(curve.p_fa - 0.1)))
        assert pd_at_pfa(curve, curve.p_fa[i]) == pytest.approx(np.max(curve.p_d[curve.p_fa == curve.p_fa[i]]))

    def test_log_interpolation(self):
        c = RocCurve([0, 1, 2], [1.0, 0.1, 0.01], [1.0, 0.8, 0.2])
        assert pd_at_pfa(c, math.sqrt(0.1 * 0.01)) == pytest.approx(0.5)

    def test_floor(self, curve):
        with pytest.raises(UnresolvablePfaError):
            pd_at_pfa(curve, 1e-4)

    def test_warns_below_ten_exceedances(self, curve):
        with pytest.warns(ResolutionWarning):
            pd_at_pfa(curve, 5e-3)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            pd_at_pfa(curve, 2e-2)

    def test_bad_target(self, curve):
        with pytest.raises(UnresolvablePfaError):
            pd_at_pfa(curve, 0.0)


class TestCsv:
    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(2)
        curve = roc_from_series(series(rng.normal(size=50), "on"), series(rng.normal(size=40), "off"))
        write_roc_csv(tmp_path / "roc.csv", curve)
        back = read_roc_csv(tmp_path / "roc.csv")
        np.testing.assert_array_equal(back.thresholds, curve.thresholds)
        np.testing.assert_array_equal(back.p_fa, curve.p_fa)
        np.testing.assert_array_equal(back.p_d, curve.p_d)
        assert (tmp_path / "roc.csv").read_text().splitlines()[0] == "threshold,p_fa,p_d"

    @pytest.mark.parametrize(
        "text, line",
        [
            ("t,p_fa,p_d\n1,0.5,0.5\n", "line 1"),
            ("threshold,p_fa,p_d\n1,0.5\n", "line 2"),
            ("threshold,p_fa,p_d\n1,0.5,0.5\n2,x,0.1\n", "line 3"),
            ("threshold,p_fa,p_d\n1,1.5,0.5\n", "line 2"),
        ],
    )
    def test_schema_errors_name_line(self, tmp_path, text, line):
        p = tmp_path / "bad.csv"
        p.write_text(text)
        with pytest.raises(RocSchemaError, match=line):
            read_roc_csv(p)

    def test_empty(self, tmp_path):
        p = tmp_path / "e.csv"
        p.write_text("threshold,p_fa,p_d\n")
        with pytest.raises(RocSchemaError):
            read_roc_csv(p)

    def test_hist(self, tmp_path):
        s = summarize(series([0, 1, 2, 3], "on"), series([0, 0, 1], "off"), bins=3)
        assert s.counts_on.sum() == 4 and s.counts_off.sum() == 3
        write_hist_csv(tmp_path / "h.csv", s)
        lines = (tmp_path / "h.csv").read_text().splitlines()
        assert lines[0] == "bin_left,bin_right,count_on,count_off"
        assert len(lines) == 4


@dataclass
class ToyConfig:
    # p_d = p_fa ** (1 / (1 + n rho^2)): performance depends on n rho^2 only
    rho: float
    window_len: int

    def pd_at(self, n, detector_id, pfa_grid):
        return np.asarray(pfa_grid) ** (1.0 / (1.0 + n * self.rho**2))


class TestIntegrationGain:
    def test_grid(self):
        g = gain_grid()
        assert g[0] == pytest.approx(1 / 32) and g[-1] == pytest.approx(32)
        assert len(g) == 2 * 5 * 65 + 1
        assert 1.0 in g

    @pytest.mark.parametrize("ratio_sq", [4.0, 0.5, 1.0])
    def test_recovers_power_ratio(self, ratio_sq):
        a = ToyConfig(0.2 * math.sqrt(ratio_sq), 1000)
        b = ToyConfig(0.2, 1000)
        res = integration_gain(a, b, 1, [1e-3, 1e-2, 1e-1])
        assert res.k == pytest.approx(ratio_sq, rel=0.01)
        assert res.objective < 1e-6

    def test_boundary_raises(self):
        with pytest.raises(GainNonconvergence):
            integration_gain(ToyConfig(2.0, 1000), ToyConfig(0.01, 1000), 1, [1e-3, 1e-2, 1e-1])

    def test_simulated_is_reproducible(self):
        cov = tmn_covariance(TmnParams(1.0, 4.0, 4.0))
        cfg = SimulatedConfig(cov, off_covariance(cov), 100, 300, seed=3)
        a = cfg.pd_at(100, 1, [0.05, 0.1])
        np.testing.assert_array_equal(a, cfg.pd_at(100, 1, [0.05, 0.1]))
