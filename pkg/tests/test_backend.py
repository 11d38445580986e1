import math
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from qtmsradar import _kernels_py as pure
from qtmsradar._backend import BACKEND, kernels
from qtmsradar.bessel import bessel_k_ratio

compiled = pytest.importorskip("qtmsradar._ckernels")


def series_args(n, rho, t):
    # arguments as prepared by the analytic detection probability
    a = 4.0 * t / (1.0 - rho * rho)
    b = rho * a
    return (float(n), rho, a, b, 0.0, bessel_k_ratio(n, a), 0.0)


class TestSelection:
    @pytest.mark.skipif(os.environ.get("QTMSRADAR_PURE", "") not in ("", "0"), reason="fallback forced")
    def test_default_is_compiled(self):
        assert BACKEND == "compiled"
        assert kernels is compiled

    def test_env_forces_fallback(self):
        code = "from qtmsradar._backend import BACKEND; print(BACKEND)"
        env = dict(os.environ, QTMSRADAR_PURE="1")
        out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
        assert out.stdout.strip() == "python"

    def test_same_interface(self):
        for name in ("window_stats", "batch_window_stats", "log_series_sum", "SeriesNonconvergence", "NUM_STATS"):
            assert hasattr(pure, name) and hasattr(compiled, name)
        assert pure.NUM_STATS == compiled.NUM_STATS


class TestWindowStatsParity:
    @given(arrays(np.float64, st.tuples(st.integers(2, 300), st.just(4)), elements=st.floats(-1e3, 1e3)))
    @settings(max_examples=80)
    def test_single(self, x):
        a = pure.window_stats(x)
        b = compiled.window_stats(x)
        scale = float(np.max(x * x)) + 1.0
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12 * scale)

    def test_batch(self):
        x = np.random.default_rng(0).standard_normal((7, 50, 4))
        np.testing.assert_allclose(pure.batch_window_stats(x), compiled.batch_window_stats(x), rtol=1e-12, atol=1e-13)
        assert compiled.batch_window_stats(x).shape == (7, pure.NUM_STATS)

    def test_noncontiguous_input(self):
        x = np.random.default_rng(1).standard_normal((4, 60)).T
        np.testing.assert_allclose(compiled.window_stats(x), pure.window_stats(np.ascontiguousarray(x)), rtol=1e-12)


class TestSeriesParity:
    @pytest.mark.parametrize("n, rho, t", [(1, 0.9, 2.0), (16, 0.2, 4.0), (1000, 0.05, 300.0), (100_000, 0.01, 8000.0)])
    def test_matches(self, n, rho, t):
        args = series_args(n, rho, t)
        a, ka = pure.log_series_sum(*args, 1e-17, 1_000_000)
        b, kb = compiled.log_series_sum(*args, 1e-17, 1_000_000)
        assert a == pytest.approx(b, rel=1e-14, abs=1e-13)
        assert ka == kb

    @given(st.integers(1, 5000), st.floats(1e-6, 0.9), st.floats(0.05, 2.0))
    @settings(max_examples=60, deadline=None)
    def test_property(self, n, rho, frac):
        args = series_args(n, rho, frac * n)
        a, _ = pure.log_series_sum(*args, 1e-17, 1_000_000)
        b, _ = compiled.log_series_sum(*args, 1e-17, 1_000_000)
        assert math.isfinite(a)
        assert a == pytest.approx(b, rel=1e-13, abs=1e-12)

    @pytest.mark.parametrize("mod", [pure, compiled])
    def test_nonconvergence(self, mod):
        args = series_args(1000, 0.99, 10.0)
        with pytest.raises(mod.SeriesNonconvergence):
            mod.log_series_sum(*args, 1e-17, 50)
        assert issubclass(mod.SeriesNonconvergence, ArithmeticError)
