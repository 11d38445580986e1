"""Phase estimation and rotation of channel 1 to the zero-phase form.

After rotation the cross block of the covariance is
``rho*s1*s2 * [[1, 0], [0, -1]]``: all correlation sits in ``<I1 I2>`` and
``<Q1 Q2>``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

__all__ = [
    "DegenerateWindowError",
    "PhaseEstimate",
    "NOISE_FLOOR_PFA",
    "estimate_phase",
    "phase_from_moments",
    "rotate_to_zero_phase",
    "rotate_moments",
    "align_blocks",
    "block_phase",
]

DEFAULT_BLOCK_LEN = 1_000_000
# The magnitude test flags estimates whose cross-block strength would be
# exceeded this often by a window with no correlation at all.
NOISE_FLOOR_PFA = 1e-3


class DegenerateWindowError(ValueError):
    """The window carries no cross-channel moments; no phase is available."""


@dataclass(frozen=True)
class PhaseEstimate:
    phi: float
    magnitude: float
    noise_floor: float

    @property
    def low_confidence(self) -> bool:
        return self.magnitude < self.noise_floor


def phase_from_moments(m: np.ndarray, n: int) -> PhaseEstimate:
    """Phase estimate from a zero-mean moment matrix built on ``n`` samples."""
    cos_part = m[0, 2] - m[1, 3]
    sin_part = m[0, 3] + m[1, 2]
    magnitude = math.hypot(cos_part, sin_part)
    if magnitude == 0.0:
        raise DegenerateWindowError("cross-channel moments vanish; phase unavailable")
    s = math.sqrt(0.5 * (m[0, 0] + m[1, 1]) * 0.5 * (m[2, 2] + m[3, 3]))
    # With no correlation, (cos_part, sin_part) is circular Gaussian with
    # per-component variance 2 s^2 / n, so the magnitude is Rayleigh.
    floor = math.sqrt(-2.0 * math.log(NOISE_FLOOR_PFA)) * s * math.sqrt(2.0 / n)
    return PhaseEstimate(math.atan2(sin_part, cos_part), magnitude, floor)


def estimate_phase(window: np.ndarray) -> PhaseEstimate:
    """Fit the inter-channel phase of a window of ``(I1, Q1, I2, Q2)`` rows."""
    x = np.asarray(window, dtype=float)
    if x.ndim != 2 or x.shape[1] != 4:
        raise ValueError("window must have shape (N, 4)")
    if x.shape[0] < 2:
        raise ValueError("phase estimation needs at least 2 samples")
    return phase_from_moments(x.T @ x / x.shape[0], x.shape[0])


def _channel1_rotation(phi: float) -> np.ndarray:
    c = math.cos(phi)
    s = math.sin(phi)
    return np.array([[c, s], [-s, c]])


def rotate_to_zero_phase(window: np.ndarray, phi: float) -> np.ndarray:
    """Rotate channel 1 by ``-phi``; channel 2 is returned unchanged.

    ``I1' = I1 cos(phi) + Q1 sin(phi)``, ``Q1' = -I1 sin(phi) + Q1 cos(phi)``.
    """
    if not math.isfinite(phi):
        raise ValueError("phi must be finite")
    x = np.array(window, dtype=float)
    if phi == 0.0:
        return x
    c = math.cos(phi)
    s = math.sin(phi)
    i1 = x[:, 0].copy()
    q1 = x[:, 1].copy()
    x[:, 0] = i1 * c + q1 * s
    x[:, 1] = -i1 * s + q1 * c
    return x


def rotate_moments(m: np.ndarray, phi: float) -> np.ndarray:
    """Apply the same rotation to a 4x4 moment matrix."""
    t = np.eye(4)
    t[:2, :2] = _channel1_rotation(phi)
    return t @ np.asarray(m) @ t.T


def block_phase(m: np.ndarray, n: int) -> float:
    """Rotation angle for a pooled block, or 0 when no phase can be trusted.

    Rotating a block of pure noise by its fitted angle would bias detector 1
    upward, so blocks flagged low-confidence are left alone.
    """
    try:
        est = phase_from_moments(m, n)
    except DegenerateWindowError:
        return 0.0
    return 0.0 if est.low_confidence else est.phi


def align_blocks(
    windows: Iterable[np.ndarray], block_len: int = DEFAULT_BLOCK_LEN
) -> Iterator[np.ndarray]:
    """Rotate consecutive windows block by block.

    Windows are grouped in order until a group holds at least ``block_len``
    samples; the phase is fitted on the pooled group and every window in it
    is rotated by that phase. Degenerate blocks pass through unrotated.
    """
    pending: list[np.ndarray] = []
    count = 0
    for win in windows:
        pending.append(win)
        count += len(win)
        if count >= block_len:
            yield from _rotate_group(pending)
            pending = []
            count = 0
    if pending:
        yield from _rotate_group(pending)


def _rotate_group(group: list[np.ndarray]) -> Iterator[np.ndarray]:
    pooled = sum(w.T @ w for w in group)
    n = sum(len(w) for w in group)
    phi = block_phase(pooled / n, n)
    for w in group:
        yield rotate_to_zero_phase(w, phi)
