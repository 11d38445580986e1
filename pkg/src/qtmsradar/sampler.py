"""Seeded, reproducible generation of quadrature sample windows.

Every window is drawn from its own random substream keyed by
``(seed, condition, window index)``, so a window's content does not depend
on which worker produces it or in which order windows are requested.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterator, Literal, TypeVar

import numpy as np

from .signal_model import Covariance4

__all__ = [
    "NonPsdCovarianceError",
    "WindowSpec",
    "Condition",
    "off_covariance",
    "covariance_factor",
    "phase_path",
    "rotation_block",
    "sample_window",
    "sample_windows",
    "sample_moment_window",
    "sample_moment_windows",
    "map_windows",
    "write_samples_csv",
]

Condition = Literal["on", "off"]

_CONDITION_KEY = {"on": 1, "off": 2}
_DRIFT_KEY = 3
_MOMENT_KEY = 4
_EIG_REJECT = 1e-10

T = TypeVar("T")


class NonPsdCovarianceError(ValueError):
    pass


@dataclass(frozen=True)
class WindowSpec:
    """Integration window layout and randomness for one run.

    ``drift_stddev`` is the standard deviation (radians) of the per-window
    random-walk increment of the inter-channel phase.
    """

    window_len: int
    num_windows: int
    seed: int = 0
    drift_stddev: float = 0.0

    def __post_init__(self):
        if int(self.window_len) != self.window_len or self.window_len < 1:
            raise ValueError("window_len must be a positive integer")
        if int(self.num_windows) != self.num_windows or self.num_windows < 1:
            raise ValueError("num_windows must be a positive integer")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")
        if not (self.drift_stddev >= 0 and math.isfinite(self.drift_stddev)):
            raise ValueError("drift_stddev must be a finite non-negative number")


def off_covariance(cov: Covariance4) -> Covariance4:
    """Covariance seen with the source switched off: same powers, no cross block."""
    return cov.with_cross_block(np.zeros((2, 2)))


def covariance_factor(cov: Covariance4) -> np.ndarray:
    """Symmetric square root ``F`` with ``F @ F.T == cov``.

    Eigenvalues below ``-1e-10`` (relative to the largest entry) are rejected;
    smaller negative values are clamped to zero so that singular oracle
    matrices (rho = 1) still factor.
    """
    m = cov.matrix
    lam, vec = np.linalg.eigh(m)
    scale = max(1.0, float(np.max(np.abs(m))))
    if lam[0] < -_EIG_REJECT * scale:
        raise NonPsdCovarianceError(f"covariance has eigenvalue {lam[0]:.3e} < 0")
    lam = np.clip(lam, 0.0, None)
    return (vec * np.sqrt(lam)) @ vec.T


def rotation_block(delta: float) -> np.ndarray:
    """4x4 map that advances the cross-block phase by ``delta``.

    It acts on channel 1 only: ``(I1, Q1) -> (I1 cos d - Q1 sin d, I1 sin d + Q1 cos d)``.
    """
    c = math.cos(delta)
    s = math.sin(delta)
    t = np.eye(4)
    t[:2, :2] = [[c, -s], [s, c]]
    return t


def _generator(seed: int, *key: int) -> np.random.Generator:
    seq = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(seq))


def phase_path(spec: WindowSpec) -> np.ndarray:
    """Accumulated phase drift for each window; window 0 has no drift."""
    if spec.drift_stddev == 0:
        return np.zeros(spec.num_windows)
    steps = _generator(spec.seed, _DRIFT_KEY).normal(0.0, spec.drift_stddev, spec.num_windows)
    steps[0] = 0.0
    return np.cumsum(steps)


def _window_factor(factor: np.ndarray, drift: float) -> np.ndarray:
    if drift == 0.0:
        return factor
    return rotation_block(drift) @ factor


def _check_index(spec: WindowSpec, index: int) -> None:
    if not 0 <= index < spec.num_windows:
        raise IndexError(f"window index {index} outside 0..{spec.num_windows - 1}")


def sample_window(
    cov: Covariance4,
    spec: WindowSpec,
    condition: Condition,
    index: int,
    *,
    factor: np.ndarray | None = None,
    drift: np.ndarray | None = None,
) -> np.ndarray:
    """Draw window ``index`` as an ``(window_len, 4)`` array of ``I1, Q1, I2, Q2``.

    ``cov`` is used as given; pass :func:`off_covariance` output for the
    off condition. ``condition`` selects the substream. ``factor`` and
    ``drift`` may be precomputed by callers drawing many windows.
    """
    _check_index(spec, index)
    if factor is None:
        factor = covariance_factor(cov)
    if drift is None:
        drift = phase_path(spec)
    z = _generator(spec.seed, _CONDITION_KEY[condition], index).standard_normal(
        (spec.window_len, 4)
    )
    return z @ _window_factor(factor, float(drift[index])).T


def sample_windows(cov: Covariance4, spec: WindowSpec, condition: Condition) -> Iterator[np.ndarray]:
    """Yield every window of ``spec`` in index order."""
    factor = covariance_factor(cov)
    drift = phase_path(spec)
    for i in range(spec.num_windows):
        yield sample_window(cov, spec, condition, i, factor=factor, drift=drift)


def sample_moment_window(
    cov: Covariance4,
    spec: WindowSpec,
    condition: Condition,
    index: int,
    *,
    factor: np.ndarray | None = None,
    drift: np.ndarray | None = None,
) -> np.ndarray:
    """Draw the zero-mean moment matrix ``(1/N) sum x x^T`` of one window directly.

    Uses the Bartlett decomposition of the Wishart distribution, which is
    exactly the law of the moment matrix of ``N`` Gaussian samples, so the
    cost does not grow with ``window_len``. Needs ``window_len >= 4``.
    """
    _check_index(spec, index)
    n = spec.window_len
    if n < 4:
        raise ValueError("moment sampling needs window_len >= 4")
    if factor is None:
        factor = covariance_factor(cov)
    if drift is None:
        drift = phase_path(spec)
    rng = _generator(spec.seed, _MOMENT_KEY, _CONDITION_KEY[condition], index)
    a = np.zeros((4, 4))
    a[np.diag_indices(4)] = np.sqrt(rng.chisquare(n - np.arange(4)))
    a[np.tril_indices(4, -1)] = rng.standard_normal(6)
    f = _window_factor(factor, float(drift[index])) @ a
    return (f @ f.T) / n


def sample_moment_windows(cov: Covariance4, spec: WindowSpec, condition: Condition) -> np.ndarray:
    """All window moment matrices as a ``(num_windows, 4, 4)`` array."""
    factor = covariance_factor(cov)
    drift = phase_path(spec)
    return np.stack(
        [
            sample_moment_window(cov, spec, condition, i, factor=factor, drift=drift)
            for i in range(spec.num_windows)
        ]
    )


def map_windows(
    fn: Callable[[int], T], num_windows: int, threads: int = 1, chunk: int = 64
) -> list[T]:
    """Apply ``fn`` to every window index, in parallel if ``threads > 1``.

    Results come back in index order, so output never depends on ``threads``.
    """
    if threads <= 1 or num_windows <= chunk:
        return [fn(i) for i in range(num_windows)]
    bounds = [(lo, min(lo + chunk, num_windows)) for lo in range(0, num_windows, chunk)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = pool.map(lambda b: [fn(i) for i in range(*b)], bounds)
        return [r for part in parts for r in part]


def write_samples_csv(path, windows) -> None:
    """Dump raw samples, one row per sample, header ``i1,q1,i2,q2``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["i1", "q1", "i2", "q2"])
        for win in windows:
            for row in np.asarray(win):
                w.writerow([f"{v:.17g}" for v in row])
