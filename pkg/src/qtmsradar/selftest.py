"""Fast internal consistency checks run by ``qtmsradar selftest``."""

from __future__ import annotations

import math

import numpy as np

from .analytic import AnalyticModel, analytic_pdet, analytic_pfa, threshold_for_pfa
from .bessel import log_bessel_i, log_bessel_k
from .detectors import detectors_from_moments
from .sampler import WindowSpec, sample_window
from .signal_model import TmsvParams, squeezed_variances, tmsv_covariance

# Reference values from 50-digit evaluations.
_K1_1 = 0.60190723019723457473754
_I10_5 = 0.0045800444191760512612


def run_selftest() -> list[tuple[str, bool, str]]:
    out = []

    worst = 0.0
    for r in (0.0, 0.1, 0.5, 1.0, 3.0):
        c, s = math.cosh(2 * r), math.sinh(2 * r)
        q = tmsv_covariance(TmsvParams(r)).matrix
        ref = np.array([[c, 0, s, 0], [0, c, 0, -s], [s, 0, c, 0], [0, -s, 0, c]])
        worst = max(worst, float(np.max(np.abs(q - ref)) / c))
        vm, vp = squeezed_variances(TmsvParams(r))
        worst = max(worst, abs(vm - math.exp(-2 * r)), abs(vp / math.exp(2 * r) - 1))
    out.append(("tmsv_identity", worst < 1e-12, f"max relative deviation {worst:.2e}"))

    ek = abs(log_bessel_k(1, 1.0) - math.log(_K1_1))
    ei = abs(log_bessel_i(10, 5.0) - math.log(_I10_5)) / abs(math.log(_I10_5))
    out.append(("bessel_reference", max(ek, ei) < 1e-10, f"K1(1) {ek:.1e}, I10(5) {ei:.1e}"))

    bad = 0
    for n in (1, 4, 64, 1000):
        for t in (0.1, 1.0, 10.0, n / 4.0):
            m = AnalyticModel(n, 0.0)
            bad += analytic_pdet(m, t) != analytic_pfa(m, t)
    out.append(("pdet_rho0_identity", bad == 0, f"{bad} mismatches"))

    n = 100_000
    t = threshold_for_pfa(n, 1e-3)
    p = analytic_pfa(AnalyticModel(n, 0.0), t)
    out.append(("pfa_large_n", abs(p / 1e-3 - 1) < 1e-8, f"N={n}: p_FA(T)={p:.12g} at T={t:.6g}"))

    cov = tmsv_covariance(TmsvParams(0.3, 0.4))
    w = sample_window(cov, WindowSpec(64, 200, 7), "on", 3)
    x = np.stack([sample_window(cov, WindowSpec(64, 200, 7), "on", i) for i in range(200)])
    m = np.einsum("wni,wnj->wij", x, x) / 64
    d = detectors_from_moments(m)
    viol = int(np.sum(d[:, 1] > d[:, 2] * (1 + 1e-12)) + np.sum(d[:, 2] > math.sqrt(2) * d[:, 3] * (1 + 1e-12)))
    same = bool(np.array_equal(w, x[3]))
    out.append(("detector_ordering", viol == 0 and same, f"{viol} violations; window reproducible: {same}"))
    return out
