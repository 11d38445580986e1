"""Empirical ROC curves, histograms and integration gain.

Exceedance is strict: a window is declared a detection when its value is
``> T``. The threshold sweep uses every distinct observed value, so the
curve runs from ``(p_fa, p_d) = (1, 1)`` at ``T = -inf`` down to ``(0, 0)``
at the largest observed value.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np

from .detectors import DetectorSeries, Method, run_experiment
from .sampler import WindowSpec
from .signal_model import Covariance4

__all__ = [
    "MismatchedSeriesError",
    "UnresolvablePfaError",
    "ResolutionWarning",
    "GainNonconvergence",
    "RocCurve",
    "roc_from_series",
    "pd_at_pfa",
    "GainConfig",
    "GainResult",
    "SimulatedConfig",
    "gain_grid",
    "integration_gain",
    "Summary",
    "summarize",
    "write_roc_csv",
    "read_roc_csv",
    "write_hist_csv",
    "RocSchemaError",
]

MIN_EXCEEDANCES = 10
GAIN_POINTS_PER_OCTAVE = 65
GAIN_OCTAVES = 5
_COARSE_STRIDE = 8


class MismatchedSeriesError(ValueError):
    pass


class UnresolvablePfaError(ValueError):
    pass


class ResolutionWarning(UserWarning):
    pass


class GainNonconvergence(ArithmeticError):
    pass


class RocSchemaError(ValueError):
    pass


@dataclass
class RocCurve:
    """Thresholds with their false-alarm and detection probabilities.

    Arrays are ordered by increasing threshold. ``n_windows_on`` and
    ``n_windows_off`` are zero for analytic curves.
    """

    thresholds: np.ndarray
    p_fa: np.ndarray
    p_d: np.ndarray
    n_windows_on: int = 0
    n_windows_off: int = 0
    window_len: int = 0

    def __post_init__(self):
        self.thresholds = np.asarray(self.thresholds, dtype=float)
        self.p_fa = np.asarray(self.p_fa, dtype=float)
        self.p_d = np.asarray(self.p_d, dtype=float)
        if not (self.thresholds.shape == self.p_fa.shape == self.p_d.shape):
            raise ValueError("thresholds, p_fa and p_d must have equal length")
        for p in (self.p_fa, self.p_d):
            if np.any((p < 0) | (p > 1)):
                raise ValueError("probabilities must lie in [0, 1]")

    def __len__(self):
        return len(self.thresholds)

    @property
    def pfa_floor(self) -> float:
        """Smallest resolvable false-alarm probability."""
        return 1.0 / self.n_windows_off if self.n_windows_off else 0.0

    def is_monotone(self) -> bool:
        return bool(np.all(np.diff(self.p_fa) <= 0) and np.all(np.diff(self.p_d) <= 0))

    def auc(self) -> float:
        """Area under the curve by the trapezoid rule in ``p_fa``."""
        x = self.p_fa[::-1]
        y = self.p_d[::-1]
        return float(np.sum(np.diff(x) * (y[1:] + y[:-1]) / 2.0))

    def pd_standard_error(self, p_d) -> np.ndarray:
        """Binomial standard error of detection probabilities on this curve."""
        p = np.asarray(p_d, dtype=float)
        if not self.n_windows_on:
            return np.zeros_like(p)
        return np.sqrt(p * (1.0 - p) / self.n_windows_on)


def _exceed_fraction(sorted_vals: np.ndarray, thresholds: np.ndarray) -> np.ndarray:
    return (len(sorted_vals) - np.searchsorted(sorted_vals, thresholds, side="right")) / len(sorted_vals)


def roc_from_series(on: DetectorSeries, off: DetectorSeries) -> RocCurve:
    """Empirical ROC from on- and off-condition detector outputs."""
    if len(on) == 0 or len(off) == 0:
        raise MismatchedSeriesError("series must be non-empty")
    if on.detector_id != off.detector_id or on.window_len != off.window_len:
        raise MismatchedSeriesError("on and off series come from different detectors or N")
    on_s = np.sort(on.values)
    off_s = np.sort(off.values)
    thresholds = np.concatenate([[-np.inf], np.unique(np.concatenate([on_s, off_s]))])
    return RocCurve(
        thresholds,
        _exceed_fraction(off_s, thresholds),
        _exceed_fraction(on_s, thresholds),
        len(on),
        len(off),
        on.window_len,
    )


def pd_at_pfa(curve: RocCurve, target_pfa: float, *, warn: bool = True) -> float:
    """Detection probability at ``target_pfa``, interpolated linearly in
    ``log p_fa`` between the curve's distinct false-alarm levels.

    At each false-alarm level the best (largest) detection probability is
    used. A :class:`ResolutionWarning` is issued when fewer than 10
    off-windows exceed the implied threshold.
    """
    target = float(target_pfa)
    if not 0.0 < target <= 1.0:
        raise UnresolvablePfaError("target p_fa must lie in (0, 1]")
    if curve.n_windows_off and target < curve.pfa_floor:
        raise UnresolvablePfaError(
            f"target p_fa {target:g} is below the floor 1/{curve.n_windows_off}"
        )
    mask = curve.p_fa > 0
    levels, inverse = np.unique(curve.p_fa[mask], return_inverse=True)
    if levels.size == 0 or target < levels[0] or target > levels[-1]:
        raise UnresolvablePfaError(f"target p_fa {target:g} is outside the curve")
    best = np.full(levels.size, -np.inf)
    np.maximum.at(best, inverse, curve.p_d[mask])
    if warn and curve.n_windows_off and target * curve.n_windows_off < MIN_EXCEEDANCES:
        warnings.warn(
            f"fewer than {MIN_EXCEEDANCES} off-windows exceed the threshold at p_fa={target:g}",
            ResolutionWarning,
            stacklevel=2,
        )
    return float(np.interp(math.log(target), np.log(levels), best))


class GainConfig(Protocol):
    """A radar configuration that can report detection probabilities at
    arbitrary integration length."""

    window_len: int

    def pd_at(self, n: int, detector_id: int, pfa_grid: np.ndarray) -> np.ndarray: ...


@dataclass
class SimulatedConfig:
    """Monte Carlo configuration for :func:`integration_gain`.

    Every integration length reuses the same seed (common random numbers),
    which keeps the gain objective smooth in ``k``.
    """

    cov_on: Covariance4
    cov_off: Covariance4
    window_len: int
    num_windows: int
    seed: int = 0
    method: Method = "moments"
    threads: int = 1

    def pd_at(self, n: int, detector_id: int, pfa_grid: np.ndarray) -> np.ndarray:
        spec = WindowSpec(n, self.num_windows, self.seed)
        on, off = run_experiment(
            self.cov_on, self.cov_off, spec, detector_id, method=self.method, threads=self.threads
        )
        curve = roc_from_series(on, off)
        return np.array([pd_at_pfa(curve, p, warn=False) for p in pfa_grid])


@dataclass
class GainResult:
    k: float
    objective: float
    trace: list[tuple[float, float]] = field(default_factory=list)


def gain_grid(points_per_octave: int = GAIN_POINTS_PER_OCTAVE, octaves: int = GAIN_OCTAVES) -> np.ndarray:
    """Geometric grid of ``k`` from ``2^-octaves`` to ``2^octaves``."""
    j = np.arange(-octaves * points_per_octave, octaves * points_per_octave + 1)
    return 2.0 ** (j / points_per_octave)


def integration_gain(
    config_a: GainConfig,
    config_b: GainConfig,
    detector_id: int,
    pfa_grid: Sequence[float],
    *,
    points_per_octave: int = GAIN_POINTS_PER_OCTAVE,
    octaves: int = GAIN_OCTAVES,
) -> GainResult:
    """Factor ``k`` by which ``config_b`` must lengthen its windows to match
    ``config_a``.

    Minimizes ``sum_p (p_d^A(N) - p_d^B(kN))^2`` over the false-alarm grid,
    with ``N = config_a.window_len`` and ``k`` on a geometric grid. A coarse
    scan over every 8th grid point is refined around its best point. Raises
    :class:`GainNonconvergence` when the minimum sits on the grid boundary.
    """
    grid = np.asarray(pfa_grid, dtype=float)
    n = config_a.window_len
    target = np.asarray(config_a.pd_at(n, detector_id, grid), dtype=float)
    ks = gain_grid(points_per_octave, octaves)
    cache: dict[int, float] = {}

    def objective(i):
        m = max(1, int(round(ks[i] * n)))
        if m not in cache:
            pd = np.asarray(config_b.pd_at(m, detector_id, grid), dtype=float)
            cache[m] = float(np.sum((target - pd) ** 2))
        return cache[m]

    centre = octaves * points_per_octave
    coarse = list(range(centre % _COARSE_STRIDE, len(ks), _COARSE_STRIDE))
    vals = {i: objective(i) for i in coarse}
    best = min(coarse, key=lambda i: (vals[i], abs(i - centre)))
    lo = max(0, best - _COARSE_STRIDE)
    hi = min(len(ks) - 1, best + _COARSE_STRIDE)
    for i in range(lo, hi + 1):
        vals[i] = objective(i)
    best = min(vals, key=lambda i: (vals[i], abs(i - centre)))
    trace = [(float(ks[i]), vals[i]) for i in sorted(vals)]
    if best in (0, len(ks) - 1):
        raise GainNonconvergence(f"objective minimum at the grid boundary k={ks[best]:g}")
    return GainResult(float(ks[best]), vals[best], trace)


@dataclass
class Summary:
    """Equal-width histograms over the pooled range plus the raw series."""

    edges: np.ndarray
    counts_on: np.ndarray
    counts_off: np.ndarray
    on: DetectorSeries
    off: DetectorSeries

    def write_hist_csv(self, path) -> None:
        write_hist_csv(path, self)


def summarize(on: DetectorSeries, off: DetectorSeries, bins: int = 50) -> Summary:
    if len(on) == 0 or len(off) == 0:
        raise ValueError("series must be non-empty")
    pooled = np.concatenate([on.values, off.values])
    edges = np.histogram_bin_edges(pooled, bins=bins)
    counts_on, _ = np.histogram(on.values, bins=edges)
    counts_off, _ = np.histogram(off.values, bins=edges)
    return Summary(edges, counts_on, counts_off, on, off)


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_roc_csv(path, curve: RocCurve) -> None:
    """``threshold,p_fa,p_d`` rows in increasing threshold order."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["threshold", "p_fa", "p_d"])
        for t, f, d in zip(curve.thresholds, curve.p_fa, curve.p_d):
            w.writerow([_fmt(t), _fmt(f), _fmt(d)])


def read_roc_csv(path) -> RocCurve:
    """Parse a ``roc.csv`` file; schema errors name the offending line."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["threshold", "p_fa", "p_d"]:
            raise RocSchemaError(f"line 1: expected header threshold,p_fa,p_d, got {header}")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 3:
                raise RocSchemaError(f"line {lineno}: expected 3 fields, got {len(row)}")
            try:
                vals = [float(v) for v in row]
            except ValueError as exc:
                raise RocSchemaError(f"line {lineno}: {exc}") from None
            if not (0 <= vals[1] <= 1 and 0 <= vals[2] <= 1):
                raise RocSchemaError(f"line {lineno}: probability outside [0, 1]")
            rows.append(vals)
    if not rows:
        raise RocSchemaError("no data rows")
    arr = np.array(rows)
    return RocCurve(arr[:, 0], arr[:, 1], arr[:, 2])


def write_hist_csv(path, summary: Summary) -> None:
    """``bin_left,bin_right,count_on,count_off`` rows."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["bin_left", "bin_right", "count_on", "count_off"])
        e = summary.edges
        for i in range(len(e) - 1):
            w.writerow([_fmt(e[i]), _fmt(e[i + 1]), int(summary.counts_on[i]), int(summary.counts_off[i])])
