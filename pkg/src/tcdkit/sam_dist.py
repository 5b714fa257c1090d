"""Distribution of the windowed LLR sum for a general Gaussian change.

When both mean and variance move, the per-sample LLR is a quadratic in a
Gaussian variable and the sum of ``m`` of them has no convenient closed
form. We approximate its cdf by an Edgeworth series built from exact raw
moments, and the false-alarm probability over ``m_alpha`` windows by a
Gumbel (extreme-value) law anchored at the ``1 - 1/m_alpha`` quantile.

Conventions:

* Hermite polynomials are the probabilists' ones.
* Correction terms carry the usual ``1/k!`` weights, i.e.
  ``F(z) = Phi(t) - phi(t) * (C3/3! He2(t) + C4/4! He3(t) + C6/6! He5(t))``
  with ``C6 = 10 C3**2`` and ``t = (z - mu_z)/sigma_z``.
* Densities are per unit of ``z`` (the standardised density divided by
  ``sigma_z``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import comb
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .change_models import ChangeModel, GaussianSpec, Hypothesis, LlrCoeffs, llr_coeffs
from .errors import DomainError, NumericalError
from .stats_core import gaussian_raw_moment, hermite_poly, norm_cdf, norm_pdf

_FACT = {3: 6.0, 4: 24.0, 6: 720.0}
_BRACKET_SIGMAS = 12.0
_GRID_POINTS = 4801


@dataclass(frozen=True)
class LlrMoments:
    """Raw moments of one LLR sample and of the sum of ``m`` of them."""

    xi_y: tuple  # (xi_y1, xi_y2, xi_y3, xi_y4)
    m: int
    mu_z: float
    sigma2_z: float
    xi_z: tuple  # (xi_z2, xi_z3, xi_z4)
    hypothesis: Optional[Hypothesis] = None


@dataclass(frozen=True)
class EdgeworthCdf:
    mu_z: float
    sigma_z: float
    c3: float
    c4: float
    c6: float
    hypothesis: Optional[Hypothesis] = None

    def __post_init__(self):
        if not self.sigma_z > 0.0:
            raise DomainError(f"sigma_z must be positive, got {self.sigma_z!r}")

    def cdf(self, z: float) -> float:
        return edgeworth_cdf(self, z)

    def sf(self, z: float) -> float:
        return 1.0 - edgeworth_cdf(self, z)

    def pdf(self, z: float) -> float:
        return edgeworth_pdf(self, z)

    def quantile(self, p: float) -> float:
        return edgeworth_quantile(self, p)


@dataclass(frozen=True)
class EvtParams:
    delta: float
    gamma: float

    def __post_init__(self):
        if not self.gamma > 0.0:
            raise DomainError(f"EVT rate must be positive, got {self.gamma!r}")


def llr_raw_moment(coeffs: LlrCoeffs, metric: GaussianSpec, n: int) -> float:
    """E[(a x^2 + b x + c)^n] for x ~ metric, by binomial expansion."""
    if not 1 <= n <= 4:
        raise DomainError(f"moment order must be in 1..4, got {n!r}")
    a, b, c = coeffs.a, coeffs.b, coeffs.c
    total = 0.0
    for i in range(n + 1):
        for j in range(i + 1):
            coef = comb(n, i) * comb(i, j) * a ** (n - i) * b ** (i - j) * c ** j
            if coef != 0.0:
                total += coef * gaussian_raw_moment(metric.mu, metric.sigma2, 2 * n - i - j)
    return total


def sum_moments(xi_y: Sequence[float], m: int,
                hypothesis: Optional[Hypothesis] = None) -> LlrMoments:
    """Raw moments of the sum of ``m`` iid samples with raw moments ``xi_y``.

    Products that involve the mean of a single sample use the per-sample mean
    ``xi_y1`` (the sum-level mean would double count ``m``).
    """
    if m < 1:
        raise DomainError(f"window length must be >= 1, got {m!r}")
    y1, y2, y3, y4 = (float(v) for v in xi_y)
    mu_z = m * y1
    sigma2_z = m * (y2 - y1 * y1)
    if not sigma2_z > 0.0:
        raise DomainError(f"LLR sum has non-positive variance {sigma2_z!r}")
    xi_z2 = mu_z * mu_z + sigma2_z
    xi_z3 = m * (y3 + (m - 1) * (3.0 * y1 * y2 + (m - 2) * y1 ** 3))
    omega = 4.0 * y1 * y3 + 3.0 * y2 * y2
    gamma_ = 6.0 * y1 * y1 * y2
    lam = (m - 3) * y1 ** 4
    xi_z4 = m * (y4 + (m - 1) * (omega + (m - 2) * (gamma_ + lam)))
    return LlrMoments((y1, y2, y3, y4), m, mu_z, sigma2_z, (xi_z2, xi_z3, xi_z4), hypothesis)


def llr_moments(model: ChangeModel, m: int, hypothesis: Hypothesis) -> LlrMoments:
    coeffs = llr_coeffs(model)
    metric = model.metric(hypothesis)
    xi_y = [llr_raw_moment(coeffs, metric, n) for n in (1, 2, 3, 4)]
    return sum_moments(xi_y, m, hypothesis)


def edgeworth_coefficients(moments: LlrMoments) -> tuple[float, float, float]:
    """(C3, C4, C6): skewness, excess kurtosis and 10*skewness**2 of the sum."""
    mu, s2 = moments.mu_z, moments.sigma2_z
    if not s2 > 0.0:
        raise DomainError("zero variance: Edgeworth coefficients undefined")
    x2, x3, x4 = moments.xi_z
    sigma = math.sqrt(s2)
    c3 = (x3 - 3.0 * mu * x2 + 2.0 * mu ** 3) / sigma ** 3
    c4 = (x4 - 4.0 * mu * x3 + 6.0 * mu * mu * x2 - 3.0 * mu ** 4) / s2 ** 2 - 3.0
    return c3, c4, 10.0 * c3 * c3


def edgeworth_from_moments(moments: LlrMoments) -> EdgeworthCdf:
    c3, c4, c6 = edgeworth_coefficients(moments)
    return EdgeworthCdf(moments.mu_z, math.sqrt(moments.sigma2_z), c3, c4, c6, moments.hypothesis)


def edgeworth_sum_cdf(model: ChangeModel, m: int, hypothesis: Hypothesis) -> EdgeworthCdf:
    """Edgeworth approximation to the cdf of the ``m``-sample LLR sum."""
    return edgeworth_from_moments(llr_moments(model, m, hypothesis))


def edgeworth_cdf(d: EdgeworthCdf, z: float) -> float:
    t = (float(z) - d.mu_z) / d.sigma_z
    if math.isinf(t):
        return 0.0 if t < 0 else 1.0
    corr = (d.c3 / _FACT[3] * hermite_poly(2, t)
            + d.c4 / _FACT[4] * hermite_poly(3, t)
            + d.c6 / _FACT[6] * hermite_poly(5, t))
    value = norm_cdf(t) - norm_pdf(t) * corr
    return min(1.0, max(0.0, value))


def edgeworth_pdf(d: EdgeworthCdf, z: float) -> float:
    t = (float(z) - d.mu_z) / d.sigma_z
    if math.isinf(t):
        return 0.0
    corr = (d.c3 / _FACT[3] * hermite_poly(3, t)
            + d.c4 / _FACT[4] * hermite_poly(4, t)
            + d.c6 / _FACT[6] * hermite_poly(6, t))
    return max(0.0, norm_pdf(t) * (1.0 + corr) / d.sigma_z)


def edgeworth_quantile(d: EdgeworthCdf, p: float) -> float:
    """Smallest z with rectified cdf >= p, searched on mu_z +- 12 sigma_z.

    The truncated series can dip locally, so the cdf is made monotone by a
    running maximum on a grid before the final bracketed root search.
    """
    if not 0.0 < p < 1.0:
        raise DomainError(f"probability must lie in (0, 1), got {p!r}")
    lo = d.mu_z - _BRACKET_SIGMAS * d.sigma_z
    hi = d.mu_z + _BRACKET_SIGMAS * d.sigma_z
    grid = np.linspace(lo, hi, _GRID_POINTS)
    rect = np.maximum.accumulate([edgeworth_cdf(d, z) for z in grid])
    idx = int(np.searchsorted(rect, p, side="left"))
    if idx >= len(grid):
        raise NumericalError(f"Edgeworth cdf never reaches p={p} within +-12 sigma")
    if idx == 0:
        raise NumericalError(f"Edgeworth cdf already exceeds p={p} at mu - 12 sigma")
    a, b = grid[idx - 1], grid[idx]
    fb = edgeworth_cdf(d, b) - p
    if fb == 0.0:
        return float(b)
    return brentq(lambda z: edgeworth_cdf(d, z) - p, a, b, xtol=1e-12, rtol=1e-15)


def evt_params(f0: EdgeworthCdf, m_alpha: int) -> EvtParams:
    """Gumbel location/rate for the max of ``m_alpha`` window sums under H0."""
    if m_alpha < 2:
        raise DomainError(f"m_alpha must be >= 2 for the EVT approximation, got {m_alpha!r}")
    delta = f0.quantile(1.0 - 1.0 / m_alpha)
    gamma = m_alpha * f0.pdf(delta)
    if not gamma > 0.0:
        raise NumericalError(f"non-positive density at delta={delta}")
    return EvtParams(delta, gamma)


def sam_threshold(p: EvtParams, alpha_tilde: float) -> float:
    if not 0.0 < alpha_tilde < 1.0:
        raise DomainError(f"alpha_tilde must lie in (0, 1), got {alpha_tilde!r}")
    return p.delta - math.log(-math.log1p(-alpha_tilde)) / p.gamma


def sam_pfa_bound(p: EvtParams, h: float) -> float:
    expo = -p.gamma * (h - p.delta)
    if expo > 700.0:
        return 1.0
    return -math.expm1(-math.exp(expo))


def sam_pmd_bound(f1: EdgeworthCdf, h: float) -> float:
    return f1.cdf(h)
