"""Special functions used by the bound formulas.

Scalar, pure functions only. The normal cdf rides on ``math.erfc`` and the
normal quantile on ``statistics.NormalDist`` (Wichura's AS241) with one
Newton polish; the chi-squared cdf is a regularized lower incomplete gamma
evaluated by series or continued fraction depending on the argument.
"""

from __future__ import annotations

import math
from statistics import NormalDist

from scipy.optimize import brentq

from .errors import DomainError, NumericalError

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
_STD_NORMAL = NormalDist()

_GAMMA_EPS = 1e-16
_GAMMA_MAXITER = 10_000
_TINY = 1e-300


def _check_finite(x: float, name: str = "x") -> float:
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"{name} must be finite, got {x!r}")
    return x


def norm_pdf(x: float) -> float:
    """Standard normal density."""
    x = _check_finite(x)
    return _INV_SQRT_2PI * math.exp(-0.5 * x * x)


def norm_cdf(x: float) -> float:
    """Standard normal cdf, accurate in both tails."""
    x = _check_finite(x)
    return 0.5 * math.erfc(-x / _SQRT2)


def norm_quantile(p: float) -> float:
    """Inverse of :func:`norm_cdf`.

    Returns ``-inf``/``inf`` for ``p`` equal to 0/1 and raises
    :class:`DomainError` outside ``[0, 1]``.
    """
    p = float(p)
    if math.isnan(p) or p < 0.0 or p > 1.0:
        raise DomainError(f"probability must lie in [0, 1], got {p!r}")
    if p == 0.0:
        return -math.inf
    if p == 1.0:
        return math.inf
    x = _STD_NORMAL.inv_cdf(p)
    # one Newton step on whichever tail keeps the residual well conditioned
    dens = norm_pdf(x)
    if dens > 0.0:
        if p < 0.5:
            x -= (norm_cdf(x) - p) / dens
        else:
            x += (0.5 * math.erfc(x / _SQRT2) - (1.0 - p)) / dens
    return x


def _check_dof(k: int) -> int:
    if isinstance(k, bool) or int(k) != k or k < 1:
        raise DomainError(f"degrees of freedom must be a positive integer, got {k!r}")
    return int(k)


def _gamma_series(a: float, x: float) -> float:
    # P(a, x) = x^a e^-x / Gamma(a+1) * sum_n x^n / ((a+1)...(a+n))
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_GAMMA_MAXITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _GAMMA_EPS:
            break
    else:
        raise NumericalError(f"incomplete gamma series did not converge (a={a}, x={x})")
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_contfrac(a: float, x: float) -> float:
    # Q(a, x) by the modified Lentz algorithm
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _GAMMA_MAXITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _GAMMA_EPS:
            break
    else:
        raise NumericalError(f"incomplete gamma continued fraction did not converge (a={a}, x={x})")
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def gammainc_lower(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x)."""
    if a <= 0.0:
        raise DomainError(f"shape must be positive, got {a!r}")
    x = _check_finite(x)
    if x < 0.0:
        raise DomainError(f"x must be non-negative, got {x!r}")
    if x == 0.0:
        return 0.0
    if x < a + 1.0:
        return _gamma_series(a, x)
    return 1.0 - _gamma_contfrac(a, x)


def chi2_cdf(x: float, k: int) -> float:
    """Cdf of the chi-squared distribution with ``k`` degrees of freedom."""
    k = _check_dof(k)
    x = _check_finite(x)
    if x < 0.0:
        raise DomainError(f"chi-squared argument must be >= 0, got {x!r}")
    return gammainc_lower(0.5 * k, 0.5 * x)


def chi2_pdf(x: float, k: int) -> float:
    k = _check_dof(k)
    x = _check_finite(x)
    if x < 0.0:
        return 0.0
    if x == 0.0:
        return 0.5 if k == 2 else (math.inf if k == 1 else 0.0)
    half = 0.5 * k
    return math.exp((half - 1.0) * math.log(x) - 0.5 * x - half * math.log(2.0) - math.lgamma(half))


def chi2_quantile(p: float, k: int) -> float:
    """Inverse of :func:`chi2_cdf` in ``p`` for fixed ``k``."""
    k = _check_dof(k)
    p = float(p)
    if not 0.0 < p < 1.0:
        raise DomainError(f"probability must lie in (0, 1), got {p!r}")
    hi = max(1.0, 2.0 * k)
    while chi2_cdf(hi, k) < p:
        hi *= 2.0
        if hi > 1e12:
            raise NumericalError(f"could not bracket chi-squared quantile for p={p}")
    return brentq(lambda x: chi2_cdf(x, k) - p, 0.0, hi, xtol=1e-300, rtol=1e-15, maxiter=500)


def hermite_poly(k: int, z: float) -> float:
    """Probabilists' Hermite polynomial He_k(z) for 0 <= k <= 6."""
    if isinstance(k, bool) or int(k) != k or not 0 <= k <= 6:
        raise DomainError(f"Hermite degree must be an integer in 0..6, got {k!r}")
    z = float(z)
    prev, cur = 1.0, z
    if k == 0:
        return prev
    for j in range(1, int(k)):
        prev, cur = cur, z * cur - j * prev
    return cur


def gaussian_raw_moment(mu: float, sigma2: float, k: int) -> float:
    """E[X**k] for X ~ Normal(mu, sigma2)."""
    if sigma2 < 0.0:
        raise DomainError(f"variance must be non-negative, got {sigma2!r}")
    if k < 0:
        raise DomainError(f"moment order must be non-negative, got {k!r}")
    if k == 0:
        return 1.0
    if mu == 0.0 and k % 2 == 1:
        return 0.0
    prev, cur = 1.0, float(mu)
    for j in range(2, k + 1):
        prev, cur = cur, mu * cur + (j - 1) * sigma2 * prev
    return cur
