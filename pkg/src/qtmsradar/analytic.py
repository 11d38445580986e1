r"""Analytic detection and false-alarm probabilities of a correlation receiver.

For ``N`` integrated samples, correlation ``rho`` and normalized threshold
``t = T / (s1 s2)``::

    p(Z > T) = 2^(N+1) / (N-1)! * t^N
               * sum_m rho^m K_{N+m}(4t / (1 - rho^2)) I_m(4 rho t / (1 - rho^2))

    p_FA     = 2^(N+1) / (N-1)! * t^N * K_N(4t)

The statistic these describe is ``Z = |sum_i (I1 + jQ1)(I2 + jQ2)| / 4``
(see :func:`qtmsradar.detectors.matched_statistic`). All arithmetic is done
on logarithms so that ``N`` in the hundreds of thousands is no problem.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._backend import kernels
from .bessel import DEBYE_MIN_ORDER, bessel_k_ratio, debye_sums, log_bessel_i, log_bessel_k
from .roc import RocCurve, pd_at_pfa

__all__ = [
    "NumericFailure",
    "NonconvergenceError",
    "AnalyticModel",
    "AnalyticConfig",
    "analytic_pfa",
    "analytic_pdet",
    "log_analytic_pfa",
    "threshold_for_pfa",
    "analytic_roc",
    "RhoFit",
    "fit_rho",
    "golden_section",
]

SERIES_TOL = 1e-12
MAX_TERMS = 1_000_000
CLAMP_TOL = 1e-9
BISECT_RTOL = 1e-10
BISECT_MAXITER = 200
_LOG2 = math.log(2.0)


class NumericFailure(ArithmeticError):
    pass


class NonconvergenceError(ArithmeticError):
    pass


@dataclass(frozen=True)
class AnalyticModel:
    """Integration length, correlation and per-channel RMS amplitudes."""

    n_samples: int
    rho: float
    sigma1: float = 1.0
    sigma2: float = 1.0

    def __post_init__(self):
        if int(self.n_samples) != self.n_samples or self.n_samples < 1:
            raise ValueError("n_samples must be a positive integer")
        if not 0.0 <= self.rho < 1.0:
            raise ValueError("rho must lie in [0, 1)")
        if not (self.sigma1 > 0 and self.sigma2 > 0):
            raise ValueError("sigma1 and sigma2 must be positive")

    def with_n(self, n: int) -> AnalyticModel:
        return AnalyticModel(int(n), self.rho, self.sigma1, self.sigma2)

    def with_rho(self, rho: float) -> AnalyticModel:
        return AnalyticModel(self.n_samples, rho, self.sigma1, self.sigma2)


@dataclass(frozen=True)
class AnalyticConfig:
    """Analytic radar for :func:`qtmsradar.roc.integration_gain`.

    The detector id is ignored: the analytic family describes the
    matched-filter statistic only.
    """

    rho: float
    window_len: int

    def pd_at(self, n: int, detector_id: int, pfa_grid) -> np.ndarray:
        model = AnalyticModel(n, self.rho)
        return np.array([analytic_pdet(model, threshold_for_pfa(n, p)) for p in pfa_grid])


def _log_prefactor(n: int, t: float) -> float:
    return (n + 1) * _LOG2 - math.lgamma(n) + n * math.log(t)


# Stirling series for lgamma(n) - [(n - 1/2) log n - n + log(2 pi) / 2]
_STIRLING = (1 / 12, -1 / 360, 1 / 1260, -1 / 1680, 1 / 1188, -691 / 360360)


def _stirling_tail(n: float) -> float:
    inv2 = 1.0 / (n * n)
    acc = 0.0
    for c in reversed(_STIRLING):
        acc = acc * inv2 + c
    return acc / n


def _log_scaled_k(n: int, t: float, rho: float) -> float:
    """``log[2^(N+1) t^N K_N(a) / (N-1)!]`` with ``a = 4t / (1 - rho^2)``.

    For large ``N`` the terms of order ``N log N`` cancel analytically
    (Stirling against the Debye expansion), leaving
    ``N [log(1 - rho^2) + log1p(d/2) - d] + O(log)`` with
    ``d = sqrt(1 + z^2) - 1`` and ``z = a / N``. That keeps absolute accuracy
    near one ulp of the result rather than of ``lgamma(N)``.
    """
    omr2 = (1.0 - rho) * (1.0 + rho)
    a = 4.0 * t / omr2
    if n < DEBYE_MIN_ORDER:
        return _log_prefactor(n, t) + log_bessel_k(n, a)
    z = a / n
    w = math.hypot(1.0, z)
    d = z * z / (1.0 + w)
    bracket = math.log1p(-rho * rho) + math.log1p(0.5 * d) - d
    _, sum_k = debye_sums(float(n), 1.0 / w)
    return n * bracket - _stirling_tail(n) - 0.5 * math.log(w) + math.log(sum_k)


def _finish(log_p: float) -> float:
    if not math.isfinite(log_p):
        if log_p == -math.inf:
            return 0.0
        raise NumericFailure(f"log-probability is not finite ({log_p})")
    p = math.exp(log_p)
    if p > 1.0:
        if p - 1.0 > CLAMP_TOL:
            raise NumericFailure(f"probability {p} exceeds 1 beyond tolerance")
        return 1.0
    return p


def _check_t(t: float) -> float:
    t = float(t)
    if not (t > 0 and math.isfinite(t)):
        raise ValueError("normalized threshold must be positive and finite")
    return t


def log_analytic_pfa(model: AnalyticModel, threshold_norm: float) -> float:
    """Natural log of the false-alarm probability (unclamped)."""
    t = _check_t(threshold_norm)
    n = model.n_samples
    return _log_scaled_k(n, t, 0.0)


def analytic_pfa(model: AnalyticModel, threshold_norm: float) -> float:
    """False-alarm probability at normalized threshold ``T / (s1 s2)``.

    Depends only on ``model.n_samples``.
    """
    return _finish(log_analytic_pfa(model, threshold_norm))


def analytic_pdet(
    model: AnalyticModel, threshold_norm: float, series_tol: float = SERIES_TOL
) -> float:
    """Detection probability at normalized threshold ``T / (s1 s2)``.

    For ``rho == 0`` this returns :func:`analytic_pfa` itself.
    """
    t = _check_t(threshold_norm)
    rho = model.rho
    if rho == 0.0:
        return analytic_pfa(model, t)
    n = model.n_samples
    denom = (1.0 - rho) * (1.0 + rho)
    a = 4.0 * t / denom
    b = rho * a
    k_ratio = bessel_k_ratio(n, a)
    log_i0 = log_bessel_i(0, b)
    try:
        # K_N(a) and I_0(b) are factored out of the series so the running
        # log terms stay small and do not lose absolute precision.
        log_sum, _ = kernels.log_series_sum(
            float(n), rho, a, b, 0.0, k_ratio, 0.0, series_tol, MAX_TERMS
        )
    except kernels.SeriesNonconvergence as exc:
        raise NonconvergenceError(str(exc)) from exc
    return _finish(math.fsum((_log_scaled_k(n, t, rho), log_i0, log_sum)))


def threshold_for_pfa(n_samples: int, target_pfa: float) -> float:
    """Normalized threshold whose false-alarm probability is ``target_pfa``.

    Bisection on ``log t`` with an expanding upper bracket; stops at relative
    width ``1e-10`` or after 200 iterations.
    """
    if not 0.0 < target_pfa < 1.0:
        raise ValueError("target_pfa must lie in (0, 1)")
    model = AnalyticModel(n_samples, 0.0)
    goal = math.log(target_pfa)

    def excess(t):
        return log_analytic_pfa(model, t) - goal

    hi = max(1.0, math.sqrt(n_samples))
    while excess(hi) > 0:
        hi *= 2.0
        if hi > 1e300:
            raise NumericFailure("could not bracket the threshold")
    lo = hi / 2.0
    while excess(lo) < 0:
        lo /= 2.0
        if lo < 1e-300:
            raise NumericFailure("could not bracket the threshold")
    for _ in range(BISECT_MAXITER):
        mid = math.sqrt(lo * hi)
        if excess(mid) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= BISECT_RTOL * hi:
            break
    return math.sqrt(lo * hi)


def analytic_roc(model: AnalyticModel, pfa_grid: Sequence[float]) -> RocCurve:
    """ROC points ``(T, p_FA, p_D)`` at each target false-alarm probability.

    Thresholds are reported in volts^2, ``T = t * s1 * s2``, and sorted
    ascending as for empirical curves.
    """
    grid = np.asarray(sorted(set(float(p) for p in pfa_grid)), dtype=float)
    if grid.size == 0 or np.any((grid <= 0) | (grid >= 1)):
        raise ValueError("pfa grid must lie in (0, 1)")
    ts = np.array([threshold_for_pfa(model.n_samples, p) for p in grid])
    pd = np.array([analytic_pdet(model, t) for t in ts])
    pfa = np.array([analytic_pfa(model, t) for t in ts])
    order = np.argsort(ts)
    scale = model.sigma1 * model.sigma2
    return RocCurve(
        thresholds=ts[order] * scale,
        p_fa=pfa[order],
        p_d=pd[order],
        n_windows_on=0,
        n_windows_off=0,
        window_len=model.n_samples,
    )


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section(f, lo: float, hi: float, tol: float = 1e-7, maxiter: int = 200):
    """Minimize a unimodal ``f`` on ``[lo, hi]``; returns ``(x, f(x))``."""
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc = f(c)
    fd = f(d)
    for _ in range(maxiter):
        if b - a <= tol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    else:
        raise NonconvergenceError("golden-section search did not converge")
    # the bracket ends are candidates too (minimum on the boundary)
    best = min((fc, c), (fd, d), (f(lo), lo), (f(hi), hi))
    if not math.isfinite(best[0]):
        raise NonconvergenceError("objective is not finite")
    return best[1], best[0]


@dataclass(frozen=True)
class RhoFit:
    rho: float
    residual: float
    nominal_n: int
    p_fa: np.ndarray
    p_d: np.ndarray


FIT_MAX_POINTS = 32
FIT_MIN_POINTS = 5
FIT_MIN_EXCEEDANCES = 10
RHO_MAX = 0.999
FIT_SCAN_MIN = 1e-4
FIT_SCAN_POINTS = 48


def _fit_points(curve: RocCurve) -> tuple[np.ndarray, np.ndarray]:
    floor = 0.0
    if curve.n_windows_off:
        floor = FIT_MIN_EXCEEDANCES / curve.n_windows_off
    mask = (curve.p_fa > 0) & (curve.p_fa < 1) & (curve.p_fa >= floor)
    pfa = curve.p_fa[mask]
    levels = np.unique(pfa)
    if levels.size <= FIT_MAX_POINTS and not curve.n_windows_off:
        return pfa, curve.p_d[mask]
    lo = max(levels.min(), floor) if levels.size else 1.0
    hi = levels.max() if levels.size else 0.0
    if levels.size < FIT_MIN_POINTS or not lo < hi:
        return levels, levels
    grid = np.geomspace(lo, hi, min(FIT_MAX_POINTS, levels.size))
    return grid, np.array([pd_at_pfa(curve, p, warn=False) for p in grid])


def _saturating_pdet(model: AnalyticModel, t: float) -> float:
    # Near rho -> 1 the series runs to ~1e6 terms and its accumulated
    # rounding can leave p_d a few 1e-8 above 1; detection is certain there.
    try:
        return analytic_pdet(model, t)
    except (NumericFailure, NonconvergenceError):
        return 1.0


def fit_rho(curve: RocCurve, nominal_n: int, *, tol: float = 1e-6) -> RhoFit:
    """Least-squares correlation for which the analytic ROC at ``nominal_n``
    matches ``curve``: a log-spaced scan over ``[0, 0.999]`` then
    golden-section refinement between the best scan point's neighbours.

    Empirical curves are sampled at up to 32 log-spaced false-alarm levels,
    each backed by at least 10 exceeding off-windows.
    """
    pfa, pd = _fit_points(curve)
    if len(pfa) < FIT_MIN_POINTS:
        raise ValueError(f"need at least {FIT_MIN_POINTS} resolvable ROC points, got {len(pfa)}")
    ts = [threshold_for_pfa(nominal_n, p) for p in pfa]

    def objective(rho):
        model = AnalyticModel(nominal_n, rho)
        return math.fsum((_saturating_pdet(model, t) - d) ** 2 for t, d in zip(ts, pd))

    # The objective flattens once p_d saturates, so a coarse log-spaced scan
    # locates the basin before the golden-section refinement.
    grid = np.concatenate(([0.0], np.geomspace(FIT_SCAN_MIN, RHO_MAX, FIT_SCAN_POINTS)))
    vals = [objective(r) for r in grid]
    i = int(np.argmin(vals))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    rho, resid = golden_section(objective, float(lo), float(hi), tol=tol)
    return RhoFit(rho, resid, nominal_n, np.asarray(pfa), np.asarray(pd))
