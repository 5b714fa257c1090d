"""Worst-case false-alarm / missed-detection bounds and threshold selection.

For the FMA rule with window ``m`` and LLR-sum cdfs ``F0`` (no change) and
``F1`` (change present):

    Pfa(h, m_alpha) <= 1 - F0(h) ** m_alpha
    Pmd(h, m)       <= F1(h)

and the threshold meeting a false-alarm requirement ``alpha_tilde`` is
``F0^-1((1 - alpha_tilde) ** (1/m_alpha))``. CUSUM and WLC use
``h = ln(m_alpha / alpha_tilde)`` with the same ``F1(h)`` miss bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

from .change_models import ChangeModel, GeneralChange, Hypothesis, MeanChange, VarianceChange, llr_coeffs
from .detectors import DetectorKind
from .errors import DomainError, NumericalError
from .sam_dist import (EdgeworthCdf, edgeworth_sum_cdf, evt_params, sam_pfa_bound,
                       sam_threshold)
from .stats_core import chi2_cdf, chi2_pdf, chi2_quantile, norm_cdf, norm_pdf, norm_quantile

THRESHOLD_RULES = ("corollary", "quantile")


@dataclass(frozen=True)
class NormalSum:
    mean: float
    var: float
    hypothesis: Optional[Hypothesis] = None

    def __post_init__(self):
        if not self.var > 0.0:
            raise DomainError(f"variance must be positive, got {self.var!r}")

    @property
    def std(self) -> float:
        return math.sqrt(self.var)

    def cdf(self, h: float) -> float:
        if math.isinf(h):
            return 0.0 if h < 0 else 1.0
        return norm_cdf((h - self.mean) / self.std)

    def sf(self, h: float) -> float:
        if math.isinf(h):
            return 1.0 if h < 0 else 0.0
        return norm_cdf(-(h - self.mean) / self.std)

    def pdf(self, h: float) -> float:
        return norm_pdf((h - self.mean) / self.std) / self.std

    def quantile(self, p: float) -> float:
        return self.mean + self.std * norm_quantile(p)


@dataclass(frozen=True)
class ScaledChi2Sum:
    """Law of ``shift + scale * X`` with ``X ~ chi2(dof)``."""

    shift: float
    scale: float
    dof: int
    hypothesis: Optional[Hypothesis] = None

    def __post_init__(self):
        if self.scale == 0.0:
            raise DomainError("chi-squared scale must be non-zero")

    def _x(self, h):
        return (h - self.shift) / self.scale

    def cdf(self, h: float) -> float:
        if math.isinf(h):
            return 0.0 if h < 0 else 1.0
        x = self._x(h)
        if self.scale > 0:
            return chi2_cdf(x, self.dof) if x > 0 else 0.0
        return 1.0 - chi2_cdf(x, self.dof) if x > 0 else 1.0

    def sf(self, h: float) -> float:
        return 1.0 - self.cdf(h)

    def pdf(self, h: float) -> float:
        return chi2_pdf(self._x(h), self.dof) / abs(self.scale)

    def quantile(self, p: float) -> float:
        if self.scale > 0:
            return self.shift + self.scale * chi2_quantile(p, self.dof)
        return self.shift + self.scale * chi2_quantile(1.0 - p, self.dof)


SumCdf = Union[NormalSum, ScaledChi2Sum, EdgeworthCdf]


@dataclass(frozen=True)
class BoundReport:
    method: DetectorKind
    h: float
    alpha_bound: float
    beta_bound: float
    m: int
    m_alpha: int
    alpha_tilde: Optional[float] = None
    rule: str = "corollary"
    extra: dict = field(default_factory=dict, compare=False)


def llr_sum_stats(model: ChangeModel, m: int, hypothesis: Hypothesis) -> SumCdf:
    """Exact law of the ``m``-sample LLR sum for mean or variance changes.

    Under H1 the actual post-change parameters drive the data while the LLR
    coefficients stay at their tuned values.
    """
    if m < 1:
        raise DomainError(f"window length must be >= 1, got {m!r}")
    k = llr_coeffs(model)
    metric = model.metric(hypothesis)
    if isinstance(model, MeanChange):
        return NormalSum(m * (k.b * metric.mu + k.c), m * k.b * k.b * metric.sigma2, hypothesis)
    if isinstance(model, VarianceChange):
        return ScaledChi2Sum(m * k.c, metric.sigma2 * k.a, m, hypothesis)
    if isinstance(model, GeneralChange):
        raise DomainError("general Gaussian changes have no closed form; use sam_dist.edgeworth_sum_cdf")
    raise TypeError(f"not a change model: {model!r}")


def sum_distribution(model: ChangeModel, m: int, hypothesis: Hypothesis) -> SumCdf:
    """Exact law where available, Edgeworth approximation otherwise."""
    if isinstance(model, GeneralChange):
        return edgeworth_sum_cdf(model, m, hypothesis)
    return llr_sum_stats(model, m, hypothesis)


def _check_alpha(alpha_tilde: float):
    if not 0.0 < alpha_tilde < 1.0:
        raise DomainError(f"alpha_tilde must lie in (0, 1), got {alpha_tilde!r}")


def fma_pfa_bound(f0: SumCdf, h: float, m_alpha: int) -> float:
    if m_alpha < 1:
        raise DomainError(f"m_alpha must be >= 1, got {m_alpha!r}")
    tail = f0.sf(h)
    if tail >= 1.0:
        return 1.0
    return -math.expm1(m_alpha * math.log1p(-tail))


def fma_pmd_bound(f1: SumCdf, h: float) -> float:
    return f1.cdf(h)


def fma_threshold(f0: SumCdf, alpha_tilde: float, m_alpha: int) -> float:
    _check_alpha(alpha_tilde)
    p = math.exp(math.log1p(-alpha_tilde) / m_alpha)
    if not 0.0 < p < 1.0:
        raise NumericalError(f"per-window level {p!r} is degenerate")
    h = f0.quantile(p)
    if not math.isfinite(h):
        raise NumericalError(f"could not invert F0 at p={p}")
    return h


def cusum_threshold(alpha_tilde: float, m_alpha: int) -> float:
    _check_alpha(alpha_tilde)
    return math.log(m_alpha / alpha_tilde)


def cusum_pfa_bound(h: float, m_alpha: int) -> float:
    return min(1.0, m_alpha * math.exp(-h))


def bound_report(model: ChangeModel, kind: DetectorKind, alpha_tilde: float, m: int,
                 m_alpha: int, rule: str = "corollary") -> BoundReport:
    """Threshold and both bounds for one method at one false-alarm target.

    ``rule="quantile"`` sets mean-change FMA thresholds to the bare
    standard-normal quantile instead of the shifted/scaled one; the resulting
    false-alarm bound is still reported honestly. Other model families ignore it.
    """
    if rule not in THRESHOLD_RULES:
        raise DomainError(f"unknown threshold rule {rule!r}; expected one of {THRESHOLD_RULES}")
    _check_alpha(alpha_tilde)
    method = kind.method
    extra = {}
    if method == "shewhart":
        # single-sample LLRs are independent, so both formulas are exact here
        f0 = sum_distribution(model, 1, Hypothesis.H0)
        f1 = sum_distribution(model, 1, Hypothesis.H1)
        h = fma_threshold(f0, alpha_tilde, m_alpha)
        return BoundReport(kind, h, fma_pfa_bound(f0, h, m_alpha), f1.cdf(h) ** m,
                           m, m_alpha, alpha_tilde, rule)
    f1 = sum_distribution(model, m, Hypothesis.H1)
    if method in ("cusum", "wlc"):
        h = cusum_threshold(alpha_tilde, m_alpha)
        return BoundReport(kind, h, cusum_pfa_bound(h, m_alpha), fma_pmd_bound(f1, h),
                           m, m_alpha, alpha_tilde, rule)
    f0 = sum_distribution(model, m, Hypothesis.H0)
    if isinstance(model, GeneralChange):
        evt = evt_params(f0, m_alpha)
        h = sam_threshold(evt, alpha_tilde)
        alpha_bound = sam_pfa_bound(evt, h)
        extra = {"delta": evt.delta, "gamma": evt.gamma}
    else:
        if rule == "quantile" and isinstance(model, MeanChange):
            h = norm_quantile(math.exp(math.log1p(-alpha_tilde) / m_alpha))
        else:
            h = fma_threshold(f0, alpha_tilde, m_alpha)
        alpha_bound = fma_pfa_bound(f0, h, m_alpha)
    return BoundReport(kind, h, alpha_bound, fma_pmd_bound(f1, h), m, m_alpha,
                       alpha_tilde, rule, extra)


def bounds_at(model: ChangeModel, kind: DetectorKind, h: float, m: int, m_alpha: int) -> tuple[float, float]:
    """(alpha_bound, beta_bound) at an explicit threshold ``h``."""
    if kind.method == "shewhart":
        f0 = sum_distribution(model, 1, Hypothesis.H0)
        f1 = sum_distribution(model, 1, Hypothesis.H1)
        return fma_pfa_bound(f0, h, m_alpha), f1.cdf(h) ** m
    f1 = sum_distribution(model, m, Hypothesis.H1)
    if kind.method in ("cusum", "wlc"):
        return cusum_pfa_bound(h, m_alpha), f1.cdf(h)
    f0 = sum_distribution(model, m, Hypothesis.H0)
    if isinstance(model, GeneralChange):
        return sam_pfa_bound(evt_params(f0, m_alpha), h), f1.cdf(h)
    return fma_pfa_bound(f0, h, m_alpha), f1.cdf(h)


def bound_roc(model: ChangeModel, kind: DetectorKind, alpha_grid: Iterable[float], config,
              rule: str = "corollary") -> list[BoundReport]:
    """Analytic ROC: one :class:`BoundReport` per ``alpha_tilde``, ascending.

    ``config`` needs ``m`` and ``m_alpha`` attributes (e.g. ``TcdConfig``).
    """
    grid = sorted(float(a) for a in alpha_grid)
    return [bound_report(model, kind, a, config.m, config.m_alpha, rule) for a in grid]
