"""Canned desk-scale experiments, one per reproduced figure.

Each recipe writes its CSVs into ``out_dir`` and returns a
:class:`FigureResult` holding named pass/fail checks. The quantum (TMSV) and
classical (TMN) configurations share the same diagonal power so that only
their correlation differs.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .analytic import AnalyticConfig, analytic_roc, fit_rho, AnalyticModel
from .detectors import DetectorSeries, collect_window_stats, run_experiment, write_series_csv
from .roc import (
    RocCurve,
    integration_gain,
    pd_at_pfa,
    roc_from_series,
    summarize,
    write_hist_csv,
    write_roc_csv,
)
from .sampler import WindowSpec, off_covariance
from .signal_model import Covariance4, TmnParams, TmsvParams, tmn_covariance, tmsv_covariance

__all__ = [
    "FigureResult",
    "Check",
    "FIGURES",
    "UnknownFigureError",
    "matched_pair",
    "calibrate_rho",
    "simulate_roc",
    "ratio_of_fits",
    "reproduce",
]

RATIO = 2.5
POWER = 10.0
HEADLINE_N = 100_000
HEADLINE_PFA = 1e-3
CLASSICAL_PD = 0.05
GAIN_PFA_GRID = (1e-3, 1e-2, 1e-1)
NOMINAL_NS = (100, 1000)


class UnknownFigureError(KeyError):
    pass


@dataclass
class Check:
    name: str
    passed: bool
    detail: str


@dataclass
class FigureResult:
    figure_id: str
    checks: list[Check] = field(default_factory=list)
    files: list[Path] = field(default_factory=list)
    values: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str, passed: bool, detail: str) -> None:
        self.checks.append(Check(name, bool(passed), detail))


def matched_pair(rho_q: float, ratio: float = RATIO, power: float = POWER, phase: float = 0.0):
    """TMSV and TMN covariances with equal per-quadrature power ``power`` and
    correlations ``rho_q`` and ``rho_q / ratio``.

    The TMSV state gets just enough squeezing for ``sinh 2r = rho_q * power``
    and the rest of the power is added amplifier noise (vacuum units).
    """
    s = rho_q * power
    r = 0.5 * math.asinh(s)
    c = math.sqrt(1.0 + s * s)
    if c > power:
        raise ValueError("power too low for the requested correlation")
    q = tmsv_covariance(TmsvParams(r, phase, power - c, power - c))
    rho_c = rho_q / ratio
    sig = rho_c * power
    cl = tmn_covariance(TmnParams(sig, power - sig, power - sig, 1.0, 1.0, phase))
    return q, cl


def _tmn_with_rho(rho: float, power: float = POWER) -> Covariance4:
    sig = rho * power
    return tmn_covariance(TmnParams(sig, power - sig, power - sig))


def simulate_roc(
    cov: Covariance4,
    spec: WindowSpec,
    detector_id: int,
    *,
    method: str = "moments",
    threads: int = 1,
) -> tuple[RocCurve, DetectorSeries, DetectorSeries]:
    on, off = run_experiment(cov, off_covariance(cov), spec, detector_id, method=method, threads=threads)
    return roc_from_series(on, off), on, off


def _pd(curve: RocCurve, pfa: float) -> float:
    return pd_at_pfa(curve, pfa, warn=False)


def calibrate_rho(
    target_pd: float,
    *,
    n: int = HEADLINE_N,
    pfa: float = HEADLINE_PFA,
    detector_id: int = 1,
    num_windows: int = 10_000,
    seed: int = 0,
    threads: int = 1,
    iterations: int = 30,
) -> float:
    """Classical correlation giving ``target_pd`` at ``pfa`` for ``n`` samples.

    Bisection on a Monte Carlo ROC. Every step reuses the same random
    streams, so ``p_d`` is a monotone step function of ``rho``.
    """
    spec = WindowSpec(n, num_windows, seed)
    off = collect_window_stats(
        _tmn_with_rho(0.0), spec, "off", method="moments", threads=threads
    ).detector(detector_id)
    lo, hi = 0.0, 0.5
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        on = collect_window_stats(
            _tmn_with_rho(mid), spec, "on", method="moments", threads=threads
        ).detector(detector_id)
        if _pd(roc_from_series(on, off), pfa) < target_pd:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def ratio_of_fits(curve_q: RocCurve, curve_c: RocCurve, nominal_ns=NOMINAL_NS) -> dict[int, tuple[float, float, float]]:
    """Fitted ``(rho_q, rho_c, ratio)`` for each nominal N."""
    out = {}
    for n in nominal_ns:
        fq = fit_rho(curve_q, n).rho
        fc = fit_rho(curve_c, n).rho
        out[n] = (fq, fc, fq / fc if fc > 0 else math.inf)
    return out


def _dir(out_dir, fig) -> Path:
    p = Path(out_dir) / fig
    p.mkdir(parents=True, exist_ok=True)
    return p


def _write_roc(res: FigureResult, path: Path, curve: RocCurve) -> None:
    write_roc_csv(path, curve)
    res.files.append(path)


CALIBRATION_WINDOWS = 10_000


@functools.lru_cache(maxsize=None)
def _calibrated(seed: int) -> float:
    return calibrate_rho(CLASSICAL_PD, num_windows=CALIBRATION_WINDOWS, seed=seed)


def _headline_rhos(windows: int, seed: int, threads: int) -> tuple[float, float]:
    # Calibration always uses its own fixed window count so every figure
    # sees the same correlations for a given seed.
    rho_c = _calibrated(seed)
    return RATIO * rho_c, rho_c


def fig9(out_dir, *, seed=0, threads=1, windows=10_000) -> FigureResult:
    """Detector 1 ROC families; headline p_d at p_fa = 1e-3 and N = 1e5."""
    res = FigureResult("fig9")
    d = _dir(out_dir, "fig9")
    rho_q, rho_c = _headline_rhos(windows, seed, threads)
    cov_q, cov_c = matched_pair(rho_q)
    res.values.update(rho_q=rho_q, rho_c=rho_c)
    ns = (5000, 10_000, 25_000, 50_000, 75_000, 100_000)
    for label, cov in (("qtms", cov_q), ("tmn", cov_c)):
        curves = {}
        for n in ns:
            curve, _, _ = simulate_roc(cov, WindowSpec(n, windows, seed), 1, threads=threads)
            curves[n] = curve
            _write_roc(res, d / f"roc_{label}_n{n}.csv", curve)
        grid = (1e-3, 1e-2, 1e-1)
        lo, hi = curves[ns[0]], curves[ns[-1]]
        ok = all(
            _pd(hi, p) >= _pd(lo, p) - 2 * math.hypot(*lo.pd_standard_error([_pd(lo, p)]), *hi.pd_standard_error([_pd(hi, p)]))
            for p in grid
        )
        res.check(f"{label}_dominance", ok, f"N={ns[-1]} ROC dominates N={ns[0]} within 2 SE")
        res.values[f"pd_{label}"] = _pd(hi, HEADLINE_PFA)
    pd_c = res.values["pd_tmn"]
    pd_q = res.values["pd_qtms"]
    res.check("classical_calibrated", abs(pd_c - CLASSICAL_PD) <= 0.03, f"p_d(TMN)={pd_c:.4f}, target 0.05 +- 0.03")
    res.check("quantum_headline", pd_q >= 0.85, f"p_d(QTMS)={pd_q:.4f} with rho_q = 2.5 rho_c, need >= 0.85")
    return res


def fig12(out_dir, *, seed=0, threads=1, windows=10_000, rho_q: float | None = None) -> FigureResult:
    """Integration gain of the quantum over the classical model (analytic)."""
    res = FigureResult("fig12")
    d = _dir(out_dir, "fig12")
    if rho_q is None:
        rho_q, _ = _headline_rhos(windows, seed, threads)
    n = HEADLINE_N
    a = AnalyticConfig(rho_q, n)
    b = AnalyticConfig(rho_q / RATIO, n)
    g = integration_gain(a, b, 1, GAIN_PFA_GRID)
    path = d / "gain.csv"
    with open(path, "w") as fh:
        fh.write("k,objective\n")
        for k, v in g.trace:
            fh.write(f"{k:.17g},{v:.17g}\n")
    res.files.append(path)
    for label, rho, m in (("qtms", rho_q, n), ("tmn", rho_q / RATIO, n), ("tmn_scaled", rho_q / RATIO, round(g.k * n))):
        _write_roc(res, d / f"roc_{label}.csv", analytic_roc(AnalyticModel(m, rho), np.geomspace(1e-4, 0.5, 40)))
    res.values.update(k=g.k, objective=g.objective)
    res.check("gain_range", 5.5 <= g.k <= 8.5, f"k={g.k:.4f}, need [5.5, 8.5]")
    return res


def fig13(out_dir, *, seed=0, threads=1, windows=1000, n=25_000, rho_q: float = 0.02) -> FigureResult:
    """All five detectors for both radars; detector 1 should be best."""
    res = FigureResult("fig13")
    d = _dir(out_dir, "fig13")
    cov_q, cov_c = matched_pair(rho_q)
    spec = WindowSpec(n, windows, seed)
    for label, cov in (("qtms", cov_q), ("tmn", cov_c)):
        st_on = collect_window_stats(cov, spec, "on", threads=threads)
        st_off = collect_window_stats(off_covariance(cov), spec, "off", threads=threads)
        pds = {}
        for k in range(1, 6):
            curve = roc_from_series(st_on.detector(k), st_off.detector(k))
            _write_roc(res, d / f"roc_{label}_d{k}.csv", curve)
            pds[k] = (_pd(curve, 0.1), float(curve.pd_standard_error([_pd(curve, 0.1)])[0]))
        res.values[label] = pds
        best = all(pds[1][0] >= pds[k][0] - 2 * math.hypot(pds[1][1], pds[k][1]) for k in range(2, 6))
        res.check(f"{label}_d1_best", best, "p_d at p_fa=0.1: " + ", ".join(f"D{k}={v[0]:.3f}" for k, v in pds.items()))
    return res


def fig14(out_dir, *, seed=0, threads=1, windows=2000, n=10_000, rho_q: float = 0.02) -> FigureResult:
    """Detector 5 ROC for both radars at equal power; the curves coincide.

    Both radars are driven by the same random streams (common random
    numbers), so any systematic difference is not hidden by sampling noise.
    """
    res = FigureResult("fig14")
    d = _dir(out_dir, "fig14")
    cov_q, cov_c = matched_pair(rho_q)
    spec = WindowSpec(n, windows, seed)
    cq, _, _ = simulate_roc(cov_q, spec, 5, method="samples", threads=threads)
    cc, _, _ = simulate_roc(cov_c, spec, 5, method="samples", threads=threads)
    _write_roc(res, d / "roc_qtms_d5.csv", cq)
    _write_roc(res, d / "roc_tmn_d5.csv", cc)
    grid = np.geomspace(10.0 / windows, 1.0, 20)
    worst = 0.0
    for p in grid:
        a, b = _pd(cq, p), _pd(cc, p)
        se = math.hypot(*cq.pd_standard_error([a]), *cc.pd_standard_error([b]))
        z = abs(a - b) / se if se > 0 else (0.0 if a == b else math.inf)
        worst = max(worst, z)
    res.values["max_z"] = worst
    res.check("d5_equivalence", worst <= 2.0, f"max |dp_d| / SE = {worst:.3f} over {len(grid)} p_fa levels")
    return res


def fig15(out_dir, *, seed=0, threads=1, windows=10_000, n=50_000, rho_q: float | None = None) -> FigureResult:
    """Fit the analytic family to simulated ROC curves; the fitted
    correlation ratio should match the true ratio.

    Detector 3 is the statistic the analytic family describes and carries
    the check; detector 1 fits are reported alongside.
    """
    res = FigureResult("fig15")
    d = _dir(out_dir, "fig15")
    if rho_q is None:
        rho_q, _ = _headline_rhos(windows, seed, threads)
    cov_q, cov_c = matched_pair(rho_q)
    spec = WindowSpec(n, windows, seed)
    for det in (3, 1):
        cq, _, _ = simulate_roc(cov_q, spec, det, threads=threads)
        cc, _, _ = simulate_roc(cov_c, spec, det, threads=threads)
        _write_roc(res, d / f"roc_qtms_d{det}.csv", cq)
        _write_roc(res, d / f"roc_tmn_d{det}.csv", cc)
        fits = ratio_of_fits(cq, cc)
        res.values[f"d{det}"] = fits
        for nn, (fq, fc, _) in fits.items():
            for label, rho in (("qtms", fq), ("tmn", fc)):
                _write_roc(res, d / f"fit_{label}_d{det}_n{nn}.csv", analytic_roc(AnalyticModel(nn, rho), np.geomspace(1e-3, 0.5, 30)))
        if det == 3:
            ratios = [v[2] for v in fits.values()]
            res.check(
                "ratio_range",
                all(2.25 <= r <= 2.75 for r in ratios),
                "fitted ratios " + ", ".join(f"N={k}: {v[2]:.3f}" for k, v in fits.items()),
            )
    return res


def _ratio_se(on_q: DetectorSeries, on_c: DetectorSeries) -> tuple[float, float]:
    mq, mc = on_q.mean(), on_c.mean()
    r = mq / mc
    return r, abs(r) * math.hypot(on_q.standard_error() / mq, on_c.standard_error() / mc)


def _series_figure(fig: str, out_dir, seed, threads, windows, rho_q, hist: bool) -> FigureResult:
    res = FigureResult(fig)
    d = _dir(out_dir, fig)
    if rho_q is None:
        rho_q, _ = _headline_rhos(windows, seed, threads)
    cov_q, cov_c = matched_pair(rho_q)
    for n in (50_000, 100_000):
        spec = WindowSpec(n, windows, seed)
        series = {}
        for label, cov in (("qtms", cov_q), ("tmn", cov_c)):
            on, off = run_experiment(cov, off_covariance(cov), spec, 1, method="moments", threads=threads)
            series[label] = (on, off)
            if hist:
                s = summarize(on, off, bins=50)
                path = d / f"hist_{label}_n{n}.csv"
                write_hist_csv(path, s)
                overlap = float(np.minimum(s.counts_on, s.counts_off).sum()) / len(on)
                res.values[f"overlap_{label}_n{n}"] = overlap
            else:
                path = d / f"series_{label}_n{n}.csv"
                write_series_csv(path, on, off)
            res.files.append(path)
            z = abs(off.mean()) / off.standard_error()
            res.check(f"off_centred_{label}_n{n}", z <= 5.0, f"off mean = {z:.2f} SE from 0")
        r, se = _ratio_se(series["qtms"][0], series["tmn"][0])
        res.values[f"on_ratio_n{n}"] = r
        res.check(f"on_mean_ratio_n{n}", abs(r - RATIO) <= 5 * se, f"on-mean ratio {r:.3f} +- {se:.3f}, expected {RATIO}")
        if hist:
            oq, oc = res.values[f"overlap_qtms_n{n}"], res.values[f"overlap_tmn_n{n}"]
            res.check(f"separation_n{n}", oq < oc, f"histogram overlap QTMS {oq:.3f} < TMN {oc:.3f}")
    return res


def fig16(out_dir, *, seed=0, threads=1, windows=2000, rho_q: float | None = None) -> FigureResult:
    """Detector 1 time series, source on and off."""
    return _series_figure("fig16", out_dir, seed, threads, windows, rho_q, hist=False)


def fig17(out_dir, *, seed=0, threads=1, windows=2000, rho_q: float | None = None) -> FigureResult:
    """Detector 1 histograms, source on and off."""
    return _series_figure("fig17", out_dir, seed, threads, windows, rho_q, hist=True)


FIGURES: dict[str, Callable[..., FigureResult]] = {
    "fig9": fig9,
    "fig12": fig12,
    "fig13": fig13,
    "fig14": fig14,
    "fig15": fig15,
    "fig16": fig16,
    "fig17": fig17,
}


def reproduce(figure_id: str, out_dir, **kw) -> FigureResult:
    try:
        fn = FIGURES[figure_id]
    except KeyError:
        raise UnknownFigureError(figure_id) from None
    return fn(out_dir, **kw)
