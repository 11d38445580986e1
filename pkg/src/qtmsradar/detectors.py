"""Detector statistics over integration windows.

Detectors 1-4 are functions of the zero-mean sample moments of a window:

1. ``<I1 I2> - <Q1 Q2>``
2. ``|<I1 I2> - <Q1 Q2>|``
3. ``sqrt((<I1 I2> - <Q1 Q2>)^2 + (<I1 Q2> + <Q1 I2>)^2)``
4. ``sqrt(<I1 I2>^2 + <I1 Q2>^2 + <Q1 I2>^2 + <Q1 Q2>^2)``

Detector 5 is the centred sample covariance of the two channel envelopes
``sqrt(I1^2 + Q1^2)`` and ``sqrt(I2^2 + Q2^2)``. Moments use the 1/N
divisor; detector 5 uses 1/(N-1).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from ._backend import kernels
from .preprocess import block_phase, rotate_moments, rotate_to_zero_phase
from .sampler import (
    WindowSpec,
    covariance_factor,
    map_windows,
    phase_path,
    sample_moment_window,
    sample_window,
)
from .signal_model import Covariance4

__all__ = [
    "TooFewSamplesError",
    "DetectorSeries",
    "WindowStats",
    "DETECTOR_IDS",
    "sample_covariance",
    "moments_from_stats",
    "detector",
    "detectors_from_moments",
    "matched_statistic",
    "collect_window_stats",
    "run_experiment",
    "write_series_csv",
]

DETECTOR_IDS = (1, 2, 3, 4, 5)
Method = Literal["samples", "moments"]

_IU = np.triu_indices(4)


class TooFewSamplesError(ValueError):
    pass


@dataclass
class DetectorSeries:
    """Per-window outputs of one detector under one condition."""

    detector_id: int
    values: np.ndarray
    condition: str
    window_len: int

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.detector_id not in DETECTOR_IDS:
            raise ValueError(f"unknown detector {self.detector_id}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("detector outputs must be finite")

    def __len__(self):
        return len(self.values)

    def mean(self) -> float:
        return float(np.mean(self.values))

    def standard_error(self) -> float:
        if len(self.values) < 2:
            return math.nan
        return float(np.std(self.values, ddof=1) / math.sqrt(len(self.values)))


def _check_window(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[1] != 4:
        raise ValueError("window must have shape (N, 4)")
    if x.shape[0] < 2:
        raise TooFewSamplesError("need at least 2 samples per window")
    return x


def moments_from_stats(stats: np.ndarray) -> np.ndarray:
    """Rebuild the symmetric 4x4 moment matrix (or a stack of them)."""
    stats = np.asarray(stats)
    m = np.zeros(stats.shape[:-1] + (4, 4))
    m[..., _IU[0], _IU[1]] = stats[..., :10]
    m[..., _IU[1], _IU[0]] = stats[..., :10]
    return m


def sample_covariance(window) -> Covariance4:
    """Zero-mean moment matrix ``(1/N) sum x x^T`` of a window."""
    x = _check_window(window)
    return Covariance4(moments_from_stats(kernels.window_stats(x)))


def detectors_from_moments(m: np.ndarray) -> np.ndarray:
    """Detectors 1-4 for a moment matrix or stack, shape ``(..., 4)``."""
    m = np.asarray(m)
    ii = m[..., 0, 2]
    iq = m[..., 0, 3]
    qi = m[..., 1, 2]
    qq = m[..., 1, 3]
    d1 = ii - qq
    d3 = np.hypot(d1, iq + qi)
    d4 = np.hypot(np.hypot(ii, iq), np.hypot(qi, qq))
    return np.stack([d1, np.abs(d1), d3, d4], axis=-1)


def detector(k: int, window) -> float:
    """Value of detector ``k`` (1..5) on one window."""
    if k not in DETECTOR_IDS:
        raise ValueError(f"unknown detector {k}")
    x = _check_window(window)
    stats = kernels.window_stats(x)
    if k == 5:
        return float(stats[10])
    return float(detectors_from_moments(moments_from_stats(stats))[k - 1])


def matched_statistic(m: np.ndarray, n: int) -> np.ndarray:
    """The correlation-receiver statistic ``Z = |sum_i u_i v_i| / 4``.

    Here ``u = I1 + jQ1`` and ``v = I2 + jQ2``, so ``Z = n * D3 / 4``. The
    analytic exceedance probabilities in :mod:`qtmsradar.analytic` describe
    ``Z / (s1 s2)``.
    """
    return n * detectors_from_moments(m)[..., 2] / 4.0


@dataclass
class WindowStats:
    """Moment matrices (and envelope covariances when available) per window."""

    moments: np.ndarray
    envelope_cov: np.ndarray | None
    window_len: int
    condition: str

    def detector(self, k: int) -> DetectorSeries:
        if k == 5:
            if self.envelope_cov is None:
                raise ValueError("detector 5 needs raw samples; use method='samples'")
            values = self.envelope_cov
        else:
            values = detectors_from_moments(self.moments)[:, k - 1]
        return DetectorSeries(k, values, self.condition, self.window_len)


def collect_window_stats(
    cov: Covariance4,
    spec: WindowSpec,
    condition: str,
    *,
    method: Method = "samples",
    threads: int = 1,
    align_block: int | None = None,
) -> WindowStats:
    """Generate every window of ``spec`` and reduce it to its statistics.

    ``align_block`` enables phase preprocessing: consecutive windows are
    pooled into blocks of at least that many samples, the phase is fitted
    per block and channel 1 is rotated before the statistics are taken.
    """
    if spec.window_len < 2:
        raise TooFewSamplesError("need at least 2 samples per window")
    factor = covariance_factor(cov)
    drift = phase_path(spec)
    per_block = 1
    if align_block is not None:
        per_block = max(1, -(-int(align_block) // spec.window_len))
    nblocks = -(-spec.num_windows // per_block)

    def window_range(b):
        return range(b * per_block, min((b + 1) * per_block, spec.num_windows))

    if method == "moments":

        def work(b):
            ms = [
                sample_moment_window(cov, spec, condition, i, factor=factor, drift=drift)
                for i in window_range(b)
            ]
            if align_block is not None:
                phi = block_phase(sum(ms) / len(ms), spec.window_len * len(ms))
                ms = [rotate_moments(m, phi) for m in ms]
            return [(m, math.nan) for m in ms]

    elif method == "samples":

        def work(b):
            wins = [
                sample_window(cov, spec, condition, i, factor=factor, drift=drift)
                for i in window_range(b)
            ]
            if align_block is not None:
                pooled = sum(w.T @ w for w in wins) / (spec.window_len * len(wins))
                phi = block_phase(pooled, spec.window_len * len(wins))
                wins = [rotate_to_zero_phase(w, phi) for w in wins]
            out = []
            for w in wins:
                s = kernels.window_stats(w)
                out.append((moments_from_stats(s), float(s[10])))
            return out

    else:
        raise ValueError(f"unknown method {method!r}")

    chunks = map_windows(work, nblocks, threads=threads, chunk=max(1, 64 // per_block))
    flat = [item for chunk in chunks for item in chunk]
    moments = np.stack([m for m, _ in flat])
    env = None if method == "moments" else np.array([e for _, e in flat])
    return WindowStats(moments, env, spec.window_len, condition)


def run_experiment(
    cov_on: Covariance4,
    cov_off: Covariance4,
    spec: WindowSpec,
    detector_id: int,
    *,
    method: Method = "samples",
    threads: int = 1,
    align_block: int | None = None,
) -> tuple[DetectorSeries, DetectorSeries]:
    """Detector outputs for every window with the source on and off.

    The two conditions draw from independent random substreams of
    ``spec.seed``.
    """
    if detector_id not in DETECTOR_IDS:
        raise ValueError(f"unknown detector {detector_id}")
    if detector_id == 5 and method != "samples":
        raise ValueError("detector 5 needs raw samples; use method='samples'")
    kw = dict(method=method, threads=threads, align_block=align_block)
    on = collect_window_stats(cov_on, spec, "on", **kw).detector(detector_id)
    off = collect_window_stats(cov_off, spec, "off", **kw).detector(detector_id)
    return on, off


def write_series_csv(path, *series: DetectorSeries) -> None:
    """``window_index,value,condition`` rows for each series in turn."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["window_index", "value", "condition"])
        for s in series:
            for i, v in enumerate(s.values):
                w.writerow([i, f"{v:.17g}", s.condition])
