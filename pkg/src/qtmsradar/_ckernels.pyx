# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels in ``_kernels_py``.

Window statistics take a single pass over the samples, with the centred
envelope covariance updated online, and release the GIL so threaded
callers scale.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, log, exp, fabs, INFINITY

cnp.import_array()

NUM_STATS = 11


class SeriesNonconvergence(ArithmeticError):
    pass


cdef void _stats(const double[:, ::1] x, double[::1] out) noexcept nogil:
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t i
    cdef double a0, a1, a2, a3, q0, q1, q2, q3, e1, e2, d1
    cdef double s00 = 0, s01 = 0, s02 = 0, s03 = 0, s11 = 0
    cdef double s12 = 0, s13 = 0, s22 = 0, s23 = 0, s33 = 0
    cdef double m1 = 0, m2 = 0, c12 = 0
    for i in range(n):
        a0 = x[i, 0]
        a1 = x[i, 1]
        a2 = x[i, 2]
        a3 = x[i, 3]
        q0 = a0 * a0
        q1 = a1 * a1
        q2 = a2 * a2
        q3 = a3 * a3
        s00 += q0
        s01 += a0 * a1
        s02 += a0 * a2
        s03 += a0 * a3
        s11 += q1
        s12 += a1 * a2
        s13 += a1 * a3
        s22 += q2
        s23 += a2 * a3
        s33 += q3
        # the squares are needed for the moments anyway, so hypot's
        # overflow guard buys nothing; envelope co-moment in one pass
        e1 = sqrt(q0 + q1)
        e2 = sqrt(q2 + q3)
        d1 = e1 - m1
        m1 += d1 / (i + 1)
        m2 += (e2 - m2) / (i + 1)
        c12 += d1 * (e2 - m2)
    out[0] = s00 / n
    out[1] = s01 / n
    out[2] = s02 / n
    out[3] = s03 / n
    out[4] = s11 / n
    out[5] = s12 / n
    out[6] = s13 / n
    out[7] = s22 / n
    out[8] = s23 / n
    out[9] = s33 / n
    out[10] = c12 / (n - 1)


def window_stats(x):
    cdef const double[:, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    out = np.empty(NUM_STATS)
    cdef double[::1] ov = out
    with nogil:
        _stats(xv, ov)
    return out


def batch_window_stats(x):
    cdef const double[:, :, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t w = xv.shape[0]
    out = np.empty((w, NUM_STATS))
    cdef double[:, ::1] ov = out
    cdef Py_ssize_t k
    with nogil:
        for k in range(w):
            _stats(xv[k], ov[k])
    return out


cdef double _i_ratio_cf(double nu, double x) noexcept nogil:
    cdef double tiny = 1e-300
    cdef double f, c, d = 0.0, b, delta
    cdef long k = 2
    if x < 1e-150:
        return x / (2.0 * (nu + 1.0))
    f = 2.0 * (nu + 1.0) / x
    c = f
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
        if fabs(delta - 1.0) < 1e-16:
            return 1.0 / f
        k += 1


cdef int _series(double n, double rho, double a, double b, double log_k0,
                 double k_ratio, double log_i0, double tol, long m_top,
                 double[::1] h, double* result, long* used) noexcept nogil:
    # 0: converged, 1: more terms needed
    cdef long m
    cdef double hm, r, peak, total, comp, prev, lt, lt_comp, scale, term, y, t, q, step
    hm = _i_ratio_cf(<double>m_top, b)
    for m in range(m_top - 1, -1, -1):
        hm = 1.0 / (2.0 * (m + 1) / b + hm)
        h[m] = hm
    # compensated running log of rho^m K_{n+m} I_m
    lt = log_k0 + log_i0
    lt_comp = 0.0
    r = k_ratio
    peak = -INFINITY
    total = 0.0
    comp = 0.0
    prev = -INFINITY
    for m in range(m_top + 1):
        if lt > peak:
            if total != 0.0:
                scale = exp(peak - lt)
                total *= scale
                comp *= scale
            peak = lt
        term = exp(lt - peak)
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if m > 0 and lt < prev:
            q = exp(lt - prev)
            if term * q / (1.0 - q) < tol * total:
                result[0] = peak + log(total)
                used[0] = m + 1
                return 0
        prev = lt
        if m == m_top:
            break
        step = rho * r * h[m]
        if step == 0.0:
            result[0] = peak + log(total)
            used[0] = m + 1
            return 0
        r = 1.0 / r + 2.0 * (n + m + 1) / a
        y = log(step) - lt_comp
        t = lt + y
        lt_comp = (t - lt) - y
        lt = t
    return 1


def log_series_sum(double n, double rho, double a, double b, double log_k0,
                   double k_ratio, double log_i0, double tol, long max_terms):
    cdef long m_top = 64
    cdef double result = 0.0
    cdef long used = 0
    cdef int status
    cdef double[::1] h
    while True:
        if m_top > max_terms:
            m_top = max_terms
        h = np.empty(m_top)
        with nogil:
            status = _series(n, rho, a, b, log_k0, k_ratio, log_i0, tol,
                             m_top, h, &result, &used)
        if status == 0:
            return result, used
        if m_top >= max_terms:
            raise SeriesNonconvergence(f"series not converged after {max_terms} terms")
        m_top *= 4
