"""Pure-Python/numpy versions of the hot kernels.

Imported when the compiled ``_ckernels`` extension is unavailable, or when
``QTMSRADAR_PURE=1`` is set. The signatures match ``_ckernels.pyx``.
"""

from __future__ import annotations

import math

import numpy as np

NUM_STATS = 11
_IU = np.triu_indices(4)


class SeriesNonconvergence(ArithmeticError):
    pass


def window_stats(x: np.ndarray) -> np.ndarray:
    """Ten distinct second moments (1/N divisor) plus the envelope covariance.

    Moments follow the row-major upper triangle of the 4x4 matrix. The last
    entry is the centred covariance of the channel envelopes with a 1/(N-1)
    divisor.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    out = np.empty(NUM_STATS)
    out[:10] = (x.T @ x)[_IU] / n
    e1 = np.hypot(x[:, 0], x[:, 1])
    e2 = np.hypot(x[:, 2], x[:, 3])
    out[10] = np.dot(e1 - e1.mean(), e2 - e2.mean()) / (n - 1)
    return out


def batch_window_stats(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return np.stack([window_stats(w) for w in x])


def _i_ratio_cf(nu: float, x: float) -> float:
    # I_{nu+1}(x)/I_nu(x) = 1/(b1 + 1/(b2 + ...)), b_k = 2(nu+k)/x, modified Lentz
    if x < 1e-150:
        return x / (2.0 * (nu + 1.0))
    tiny = 1e-300
    f = 2.0 * (nu + 1.0) / x
    c = f
    d = 0.0
    k = 2
    while True:
        b = 2.0 * (nu + k) / x
        d = b + d
        if d == 0.0:
            d = tiny
        c = b + 1.0 / c
        if c == 0.0:
            c = tiny
        d = 1.0 / d
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < 1e-16:
            return 1.0 / f
        k += 1


def log_series_sum(
    n: float,
    rho: float,
    a: float,
    b: float,
    log_k0: float,
    k_ratio: float,
    log_i0: float,
    tol: float,
    max_terms: int,
) -> tuple[float, int]:
    """Log of ``sum_m rho^m K_{n+m}(a) I_m(b)``, and the number of terms used.

    ``log_k0 = log K_n(a)``, ``k_ratio = K_{n+1}(a)/K_n(a)`` and
    ``log_i0 = log I_0(b)`` are supplied by the caller. ``K`` is advanced by
    forward recurrence and ``I`` by ratios from a backward recurrence started
    with a continued fraction. Summation is compensated (Kahan) on terms
    scaled by the running maximum. Stops once terms are past their peak and
    the geometric tail bound falls below ``tol`` times the partial sum.
    """
    m_top = 64
    while True:
        m_top = min(m_top, max_terms)
        h = [0.0] * m_top
        hm = _i_ratio_cf(float(m_top), b)
        for m in range(m_top - 1, -1, -1):
            hm = 1.0 / (2.0 * (m + 1) / b + hm)
            h[m] = hm
        # One running log for rho^m K_{n+m} I_m, advanced by log(rho r h)
        # with compensation: the separate logs of K and I grow large and
        # opposite, and rounding in either would accumulate over the terms.
        lt = log_k0 + log_i0
        lt_comp = 0.0
        r = k_ratio
        peak = -math.inf
        total = 0.0
        comp = 0.0
        prev = -math.inf
        for m in range(m_top + 1):
            if lt > peak:
                if total:
                    scale = math.exp(peak - lt)
                    total *= scale
                    comp *= scale
                peak = lt
            term = math.exp(lt - peak)
            y = term - comp
            t = total + y
            comp = (t - total) - y
            total = t
            if m > 0 and lt < prev:
                q = math.exp(lt - prev)
                if term * q / (1.0 - q) < tol * total:
                    return peak + math.log(total), m + 1
            prev = lt
            if m == m_top:
                break
            step = rho * r * h[m]
            if step == 0.0:
                # I_{m+1}(b) underflows relative to I_m(b): the remaining
                # terms are exactly negligible.
                return peak + math.log(total), m + 1
            r = 1.0 / r + 2.0 * (n + m + 1) / a
            y = math.log(step) - lt_comp
            t = lt + y
            lt_comp = (t - lt) - y
            lt = t
        if m_top >= max_terms:
            raise SeriesNonconvergence(f"series not converged after {max_terms} terms")
        m_top *= 4
