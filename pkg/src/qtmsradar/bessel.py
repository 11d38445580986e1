r"""Modified Bessel functions :math:`I_\nu(x)` and :math:`K_\nu(x)` in log form.

Detection probabilities for correlation receivers combine :math:`K_N` at
integration lengths of :math:`10^5` and beyond with factors such as
:math:`2^{N+1}/(N-1)!` that overflow on their own. Everything here
therefore returns natural logarithms.

Three evaluation regimes are used:

* ``nu >= DEBYE_MIN_ORDER``: Debye uniform asymptotic expansion
  (DLMF 10.41.3, 10.41.4), with the :math:`u_k(t)` polynomials generated
  exactly at import time.
* small order, ``x >= max(HANKEL_MIN_ARG, nu**2)``: Hankel large-argument
  expansion (DLMF 10.40.1, 10.40.2).
* otherwise: Temme's series (``x < 2``) or Steed's continued fraction
  (``x >= 2``) for :math:`K_\mu, K_{\mu+1}` with :math:`|\mu| \le 1/2`,
  forward recurrence up to :math:`\nu`, and the Wronskian together with
  the continued fraction for :math:`I_\nu'/I_\nu` to get :math:`I_\nu`.
"""

from __future__ import annotations

import math
from fractions import Fraction

__all__ = [
    "BesselDomainError",
    "log_bessel_i",
    "log_bessel_k",
    "log_bessel_ik",
    "bessel_i_ratio",
    "bessel_k_ratio",
]

DEBYE_MIN_ORDER = 40.0
HANKEL_MIN_ARG = 40.0
_EPS = 1e-16
_FPMIN = 1e-300
_RESCALE = 1e250
_LOG_RESCALE = math.log(_RESCALE)
_LOG_2PI = math.log(2.0 * math.pi)
_LOG_PI_2 = math.log(0.5 * math.pi)

# Taylor coefficients of 1/Gamma(z) about z = 0 (index 1 upward).
_RGAMMA = (
    0.0,
    1.0,
    0.577215664901532861,
    -0.655878071520253881,
    -0.0420026350340952355,
    0.16653861138229149,
    -0.0421977345555443367,
    -0.00962197152787697356,
    0.00721894324666309954,
    -0.00116516759185906511,
    -0.000215241674114950973,
    0.000128050282388116186,
    -0.0000201348547807882387,
    -1.25049348214267066e-6,
    1.13302723198169588e-6,
    -2.0563384169776071e-7,
    6.11609510448141582e-9,
    5.00200764446922293e-9,
    -1.18127457048702014e-9,
    1.04342671169110051e-10,
    7.78226343990507125e-12,
    -3.69680561864220571e-12,
    5.10037028745447598e-13,
    -2.05832605356650678e-14,
    -5.34812253942301798e-15,
    1.22677862823826079e-15,
    -1.18125930169745877e-16,
)


class BesselDomainError(ValueError):
    """Raised for orders or arguments outside the supported domain."""


def _debye_polynomials(count: int) -> list[list[float]]:
    """Coefficients of u_0..u_{count-1}, lowest power first."""

    def deriv(p):
        return [k * c for k, c in enumerate(p)][1:] or [Fraction(0)]

    def mul(p, q):
        out = [Fraction(0)] * (len(p) + len(q) - 1)
        for i, a in enumerate(p):
            for j, b in enumerate(q):
                out[i + j] += a * b
        return out

    def add(p, q):
        n = max(len(p), len(q))
        return [
            (p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0)
            for i in range(n)
        ]

    def integrate(p):
        return [Fraction(0)] + [c / (k + 1) for k, c in enumerate(p)]

    half_t2_1mt2 = [Fraction(0), Fraction(0), Fraction(1, 2), Fraction(0), Fraction(-1, 2)]
    one_m5t2 = [Fraction(1), Fraction(0), Fraction(-5)]
    polys = [[Fraction(1)]]
    for _ in range(count - 1):
        u = polys[-1]
        term1 = mul(half_t2_1mt2, deriv(u))
        term2 = [c / 8 for c in integrate(mul(one_m5t2, u))]
        polys.append(add(term1, term2))
    return [[float(c) for c in p] for p in polys]


_U = _debye_polynomials(16)


def _horner(coeffs, t):
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * t + c
    return acc


def debye_sums(nu: float, t: float) -> tuple[float, float]:
    """Sums of ``u_k(t) / nu^k`` for ``I`` and with alternating sign for ``K``.

    ``t = nu / sqrt(nu^2 + x^2)``.
    """
    sum_i = 0.0
    sum_k = 0.0
    inv = 1.0
    sign = 1.0
    for k, coeffs in enumerate(_U):
        term = _horner(coeffs, t) * inv
        sum_i += term
        sum_k += sign * term
        if k > 3 and abs(term) < _EPS * 1e-2:
            break
        inv /= nu
        sign = -sign
    return sum_i, sum_k


def _debye(nu: float, x: float) -> tuple[float, float]:
    """(log I_nu(x), log K_nu(x)) from the uniform expansion."""
    if x == 0.0:
        raise BesselDomainError("x must be positive for the Debye expansion")
    root = math.hypot(nu, x)
    t = nu / root
    # nu * eta, with eta = sqrt(1+z^2) + log(z / (1 + sqrt(1+z^2)))
    nu_eta = root + nu * math.log(x / (nu + root))
    sum_i, sum_k = debye_sums(nu, t)
    common = 0.5 * math.log(t)  # (1+z^2)^{-1/4} = sqrt(t)
    log_i = nu_eta - 0.5 * (_LOG_2PI + math.log(nu)) + common + math.log(sum_i)
    log_k = -nu_eta + 0.5 * (_LOG_PI_2 - math.log(nu)) + common + math.log(sum_k)
    return log_i, log_k


def _hankel(nu: float, x: float) -> tuple[float, float]:
    """(log I_nu(x), log K_nu(x)) for large x."""
    mu4 = 4.0 * nu * nu
    sum_k = 1.0
    sum_i = 1.0
    term = 1.0
    prev = math.inf
    for k in range(1, 200):
        term *= (mu4 - (2 * k - 1) ** 2) / (k * 8.0 * x)
        if abs(term) > prev:
            break
        sum_k += term
        sum_i += term if k % 2 == 0 else -term
        prev = abs(term)
        if prev < _EPS * 1e-2:
            break
    log_i = x - 0.5 * (_LOG_2PI + math.log(x)) + math.log(sum_i)
    log_k = -x + 0.5 * (_LOG_PI_2 - math.log(x)) + math.log(sum_k)
    return log_i, log_k


def _gamma_helpers(mu: float) -> tuple[float, float, float, float]:
    """Temme's gam1, gam2 and 1/Gamma(1+mu), 1/Gamma(1-mu)."""
    mu2 = mu * mu
    gam1 = 0.0
    gam2 = 0.0
    power = 1.0
    for k in range(1, len(_RGAMMA) // 2 + 1):
        odd = 2 * k - 1
        even = 2 * k
        if odd < len(_RGAMMA):
            gam2 += _RGAMMA[odd] * power
        if even < len(_RGAMMA):
            gam1 -= _RGAMMA[even] * power
        power *= mu2
    # 1/Gamma(1+mu) = gam2 - mu*gam1, 1/Gamma(1-mu) = gam2 + mu*gam1
    return gam1, gam2, gam2 - mu * gam1, gam2 + mu * gam1


def _temme_k(mu: float, x: float) -> tuple[float, float]:
    """K_mu(x), K_{mu+1}(x) for |mu| <= 1/2 and x < 2."""
    x2 = 0.5 * x
    pimu = math.pi * mu
    fact = 1.0 if abs(pimu) < _EPS else pimu / math.sin(pimu)
    d = -math.log(x2)
    e = mu * d
    fact2 = 1.0 if abs(e) < _EPS else math.sinh(e) / e
    gam1, gam2, gampl, gammi = _gamma_helpers(mu)
    ff = fact * (gam1 * math.cosh(e) + gam2 * fact2 * d)
    total = ff
    e = math.exp(e)
    p = 0.5 * e / gampl
    q = 0.5 / (e * gammi)
    c = 1.0
    d = x2 * x2
    total1 = p
    mu2 = mu * mu
    for i in range(1, 10000):
        ff = (i * ff + p + q) / (i * i - mu2)
        c *= d / i
        p /= i - mu
        q /= i + mu
        delta = c * ff
        total += delta
        total1 += c * (p - i * ff)
        if abs(delta) < abs(total) * _EPS:
            break
    else:  # pragma: no cover - series always converges for x < 2
        raise ArithmeticError("Temme series did not converge")
    return total, total1 * 2.0 / x


def _steed_log_k(mu: float, x: float) -> tuple[float, float]:
    """log K_mu(x) and K_{mu+1}(x)/K_mu(x) for |mu| <= 1/2 and x >= 2."""
    mu2 = mu * mu
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = delh = d
    q1 = 0.0
    q2 = 1.0
    a1 = 0.25 - mu2
    q = c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(1, 100000):
        a -= 2 * i
        c = -a * c / (i + 1.0)
        qnew = (q1 - b * q2) / a
        q1 = q2
        q2 = qnew
        q += c * qnew
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if abs(dels / s) < _EPS:
            break
    else:  # pragma: no cover
        raise ArithmeticError("Steed continued fraction did not converge")
    h = a1 * h
    log_kmu = 0.5 * (_LOG_PI_2 - math.log(x)) - x - math.log(s)
    ratio = (mu + x + 0.5 - h) / x
    return log_kmu, ratio


def bessel_i_ratio(nu: float, x: float) -> float:
    r"""Return :math:`I_{\nu+1}(x)/I_\nu(x)` from its continued fraction."""
    if x == 0.0:
        return 0.0
    if x < _TINY_X:
        # next correction is O(x^2); also keeps 2(nu+k)/x from overflowing
        return x / (2.0 * (nu + 1.0))
    return 1.0 / _cf_tail(nu, x)


_TINY_X = 1e-150


def _cf_tail(nu: float, x: float) -> float:
    # Evaluates b1 + 1/(b2 + 1/(b3 + ...)) with b_k = 2(nu+k)/x.
    tiny = 1e-300
    b = 2.0 * (nu + 1.0) / x
    f = b if b != 0.0 else tiny
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
        if abs(delta - 1.0) < _EPS:
            return f
        k += 1
        if k > 10_000_000:  # pragma: no cover
            raise ArithmeticError("continued fraction for I ratio did not converge")


def _temme_steed_k(nu: float, x: float) -> tuple[float, float]:
    """log K_nu(x) and K_{nu+1}(x)/K_nu(x) for moderate order."""
    nl = int(nu + 0.5)
    mu = nu - nl
    if x < 2.0:
        kmu, kmu1 = _temme_k(mu, x)
        log_kmu = math.log(kmu)
        ratio = kmu1 / kmu
    else:
        log_kmu, ratio = _steed_log_k(mu, x)
    # Forward recurrence on r_n = K_{n+1}/K_n, stable for K.
    log_knu = log_kmu
    r = ratio
    for i in range(1, nl + 1):
        log_knu += math.log(r)
        r = 1.0 / r + 2.0 * (mu + i) / x
    return log_knu, r


def _temme_steed(nu: float, x: float) -> tuple[float, float]:
    """(log I_nu(x), log K_nu(x)) for moderate order, after Temme and Steed."""
    log_knu, r = _temme_steed_k(nu, x)
    # r is K_{nu+1}/K_nu; h = I_{nu+1}/I_nu from the continued fraction.
    h = bessel_i_ratio(nu, x)
    # Wronskian: I_nu K_{nu+1} + I_{nu+1} K_nu = 1/x
    log_inu = -math.log(x) - log_knu - math.log(r + h)
    return log_inu, log_knu


def _hankel_k_sum(nu: float, x: float) -> float:
    mu4 = 4.0 * nu * nu
    total = 1.0
    term = 1.0
    prev = math.inf
    for k in range(1, 200):
        term *= (mu4 - (2 * k - 1) ** 2) / (k * 8.0 * x)
        if abs(term) > prev:
            break
        total += term
        prev = abs(term)
        if prev < _EPS * 1e-2:
            break
    return total


def _debye_log_k_ratio(nu: float, x: float) -> float:
    r0 = math.hypot(nu, x)
    r1 = math.hypot(nu + 1.0, x)
    dr = (2.0 * nu + 1.0) / (r0 + r1)
    # (nu+1) eta(nu+1) - nu eta(nu), arranged to avoid cancellation
    d_nu_eta = dr + math.log(x / (nu + 1.0 + r1)) - nu * math.log1p((1.0 + dr) / (nu + r0))
    _, s0 = debye_sums(nu, nu / r0)
    _, s1 = debye_sums(nu + 1.0, (nu + 1.0) / r1)
    return -d_nu_eta - 0.5 * math.log1p(dr / r0) + math.log(s1 / s0)


def bessel_k_ratio(nu: float, x: float) -> float:
    r"""Return :math:`K_{\nu+1}(x)/K_\nu(x)` to full relative precision.

    Unlike ``exp(log_bessel_k(nu + 1, x) - log_bessel_k(nu, x))`` this does
    not lose accuracy when the logarithms themselves are large.
    """
    nu = float(nu)
    x = float(x)
    _check(nu, x, allow_zero=False)
    if nu >= DEBYE_MIN_ORDER:
        return math.exp(_debye_log_k_ratio(nu, x))
    if x >= max(HANKEL_MIN_ARG, (nu + 1.0) ** 2):
        return _hankel_k_sum(nu + 1.0, x) / _hankel_k_sum(nu, x)
    return _temme_steed_k(nu, x)[1]


def _check(nu: float, x: float, allow_zero: bool) -> None:
    if not (math.isfinite(nu) and math.isfinite(x)):
        raise BesselDomainError(f"non-finite input nu={nu!r}, x={x!r}")
    if nu < 0.0:
        raise BesselDomainError(f"order must be non-negative, got {nu!r}")
    if x < 0.0 or (x == 0.0 and not allow_zero):
        raise BesselDomainError(f"argument out of range: x={x!r}")


def log_bessel_ik(nu: float, x: float) -> tuple[float, float]:
    """Return ``(log I_nu(x), log K_nu(x))`` for ``nu >= 0`` and ``x > 0``."""
    nu = float(nu)
    x = float(x)
    _check(nu, x, allow_zero=False)
    if nu >= DEBYE_MIN_ORDER:
        return _debye(nu, x)
    if x >= max(HANKEL_MIN_ARG, nu * nu):
        return _hankel(nu, x)
    return _temme_steed(nu, x)


def log_bessel_k(nu: float, x: float) -> float:
    """Natural log of the modified Bessel function of the second kind.

    Parameters
    ----------
    nu : float
        Order, ``nu >= 0`` (any real value).
    x : float
        Argument, ``x > 0``.

    Raises
    ------
    BesselDomainError
        For negative order, non-positive argument or non-finite input.
    """
    return log_bessel_ik(nu, x)[1]


def log_bessel_i(nu: float, x: float) -> float:
    """Natural log of the modified Bessel function of the first kind.

    ``x = 0`` is allowed: the result is ``0.0`` for ``nu = 0`` and ``-inf``
    otherwise.
    """
    nu = float(nu)
    x = float(x)
    _check(nu, x, allow_zero=True)
    if x == 0.0:
        return 0.0 if nu == 0.0 else -math.inf
    if x < _TINY_X:
        return nu * math.log(0.5 * x) - math.lgamma(nu + 1.0)
    return log_bessel_ik(nu, x)[0]
