"""Gaussian change models for the multipath metrics and their LLRs.

Three shapes of change are supported:

* :class:`MeanChange` -- C/N0-like metric, the mean moves, variance is shared.
* :class:`VarianceChange` -- DLL discriminator output, zero mean, variance grows.
* :class:`GeneralChange` -- SAM-like metric, mean and variance both move.

Every model carries the *tuned* post-change parameters (the minimum change
the detector is designed for) and optionally the *actual* ones realised in
the data. LLR coefficients always use the tuned values; ``actual`` defaults
to ``tuned`` when not given.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import ConfigError, DomainError


class Hypothesis(enum.Enum):
    H0 = 0
    H1 = 1


@dataclass(frozen=True)
class GaussianSpec:
    mu: float
    sigma2: float

    def __post_init__(self):
        if not (self.sigma2 > 0.0 and math.isfinite(self.sigma2)):
            raise DomainError(f"variance must be positive and finite, got {self.sigma2!r}")
        if not math.isfinite(self.mu):
            raise DomainError(f"mean must be finite, got {self.mu!r}")

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)

    def logpdf(self, x):
        return -0.5 * np.log(2.0 * np.pi * self.sigma2) - (x - self.mu) ** 2 / (2.0 * self.sigma2)


@dataclass(frozen=True)
class LlrCoeffs:
    """LLR(x) = a*x**2 + b*x + c."""

    a: float
    b: float
    c: float


class _ModelBase:
    pre: GaussianSpec
    tuned: GaussianSpec
    actual: GaussianSpec

    def metric(self, hypothesis: Hypothesis) -> GaussianSpec:
        """Distribution of the raw metric under ``hypothesis`` (H1 uses actual)."""
        return self.pre if hypothesis is Hypothesis.H0 else self.actual

    def with_actual_as_tuned(self):
        """Same model with the actual change forced to the tuned one."""
        raise NotImplementedError


@dataclass(frozen=True)
class MeanChange(_ModelBase):
    mu0: float
    sigma2: float
    mu1_tuned: float
    mu1_actual: float | None = None

    def __post_init__(self):
        GaussianSpec(self.mu0, self.sigma2)
        if self.mu1_tuned == self.mu0:
            raise DomainError("tuned post-change mean equals the pre-change mean")
        if self.mu1_actual is None:
            object.__setattr__(self, "mu1_actual", self.mu1_tuned)

    @property
    def pre(self):
        return GaussianSpec(self.mu0, self.sigma2)

    @property
    def tuned(self):
        return GaussianSpec(self.mu1_tuned, self.sigma2)

    @property
    def actual(self):
        return GaussianSpec(self.mu1_actual, self.sigma2)

    def with_actual_as_tuned(self):
        return MeanChange(self.mu0, self.sigma2, self.mu1_tuned)


@dataclass(frozen=True)
class VarianceChange(_ModelBase):
    sigma2_0: float
    sigma2_1_tuned: float
    sigma2_1_actual: float | None = None

    def __post_init__(self):
        GaussianSpec(0.0, self.sigma2_0)
        GaussianSpec(0.0, self.sigma2_1_tuned)
        if self.sigma2_1_tuned == self.sigma2_0:
            raise DomainError("tuned post-change variance equals the pre-change variance")
        if self.sigma2_1_actual is None:
            object.__setattr__(self, "sigma2_1_actual", self.sigma2_1_tuned)
        GaussianSpec(0.0, self.sigma2_1_actual)

    @property
    def pre(self):
        return GaussianSpec(0.0, self.sigma2_0)

    @property
    def tuned(self):
        return GaussianSpec(0.0, self.sigma2_1_tuned)

    @property
    def actual(self):
        return GaussianSpec(0.0, self.sigma2_1_actual)

    def with_actual_as_tuned(self):
        return VarianceChange(self.sigma2_0, self.sigma2_1_tuned)


@dataclass(frozen=True)
class GeneralChange(_ModelBase):
    pre: GaussianSpec
    tuned: GaussianSpec
    actual: GaussianSpec | None = None

    def __post_init__(self):
        if self.tuned == self.pre:
            raise DomainError("tuned post-change distribution equals the pre-change one")
        if self.actual is None:
            object.__setattr__(self, "actual", self.tuned)

    def with_actual_as_tuned(self):
        return GeneralChange(self.pre, self.tuned)


ChangeModel = Union[MeanChange, VarianceChange, GeneralChange]


def llr_coeffs(model: ChangeModel) -> LlrCoeffs:
    """Quadratic coefficients of the LLR built from the tuned parameters."""
    if isinstance(model, MeanChange):
        d = model.mu1_tuned - model.mu0
        b = d / model.sigma2
        c = -(model.mu1_tuned ** 2 - model.mu0 ** 2) / (2.0 * model.sigma2)
        return LlrCoeffs(0.0, b, c)
    if isinstance(model, VarianceChange):
        s0, s1 = model.sigma2_0, model.sigma2_1_tuned
        a = (s1 - s0) / (2.0 * s0 * s1)
        return LlrCoeffs(a, 0.0, 0.5 * math.log(s0 / s1))
    if isinstance(model, GeneralChange):
        mu0, s0 = model.pre.mu, model.pre.sigma2
        mu1, s1 = model.tuned.mu, model.tuned.sigma2
        a = (s1 - s0) / (2.0 * s0 * s1)
        b = (s0 * mu1 - s1 * mu0) / (s0 * s1)
        c = 0.5 * math.log(s0 / s1) + (s1 * mu0 ** 2 - s0 * mu1 ** 2) / (2.0 * s0 * s1)
        return LlrCoeffs(a, b, c)
    raise TypeError(f"not a change model: {model!r}")


def llr(model: ChangeModel, x):
    """ln f1(x)/f0(x) with f1 the tuned post-change density.

    Works elementwise on numpy arrays.
    """
    k = llr_coeffs(model)
    return (k.a * x + k.b) * x + k.c


def tuned_from_error(q_table: Sequence[tuple[float, object]], epsilon: float):
    """Interpolate a user-supplied error -> tuned-parameter table at ``epsilon``.

    Table values may be scalars or equal-length tuples (one entry per tuned
    parameter). Outside the table range the end values are used.
    """
    if not q_table:
        raise ConfigError("error-to-parameter table is empty")
    keys = np.array([float(k) for k, _ in q_table])
    if np.any(np.diff(keys) <= 0):
        raise ConfigError("error-to-parameter table keys must be strictly increasing")
    values = [v for _, v in q_table]
    scalar = np.ndim(values[0]) == 0
    vals = np.atleast_2d(np.array(values, dtype=float).reshape(len(values), -1))
    out = [float(np.interp(epsilon, keys, vals[:, j])) for j in range(vals.shape[1])]
    return out[0] if scalar else tuple(out)
