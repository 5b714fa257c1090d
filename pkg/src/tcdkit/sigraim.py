"""Signal-level integrity availability.

A metric/method pair is *available* when, with the threshold set to meet the
false-alarm requirement, the missed-detection (integrity-risk) bound does not
exceed ``beta_tilde``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .change_models import ChangeModel
from .detectors import DetectorKind, make_kind
from .errors import ConfigError
from .fma_bounds import bound_report


def _samples(fs: float, seconds: float) -> int:
    # round half up; banker's rounding would turn 2.5 into 2
    return int(math.floor(fs * seconds + 0.5))


@dataclass(frozen=True)
class TcdConfig:
    m: int
    m_alpha: int
    alpha_tilde: float
    beta_tilde: float
    fs: Optional[float] = None
    t_tta: Optional[float] = None
    t_alpha: Optional[float] = None

    def __post_init__(self):
        for name in ("m", "m_alpha"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
        for name in ("alpha_tilde", "beta_tilde"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise ConfigError(f"{name} must lie in (0, 1), got {value!r}")

    @classmethod
    def from_times(cls, fs: float, t_tta: float, t_alpha: float, alpha_tilde: float,
                   beta_tilde: float, m: Optional[int] = None,
                   m_alpha: Optional[int] = None) -> "TcdConfig":
        """Window lengths from sampling rate and times, unless given explicitly."""
        if fs <= 0:
            raise ConfigError(f"sampling rate must be positive, got {fs!r}")
        m = _samples(fs, t_tta) if m is None else m
        m_alpha = _samples(fs, t_alpha) if m_alpha is None else m_alpha
        return cls(m, m_alpha, alpha_tilde, beta_tilde, fs, t_tta, t_alpha)


@dataclass(frozen=True)
class AvailabilityReport:
    metric: str
    method: DetectorKind
    h: float
    alpha_bound: float
    beta_bound: float
    beta_tilde: float
    available: bool
    inputs: dict = field(default_factory=dict, compare=False)


def availability(model: ChangeModel, config: TcdConfig, method, metric: str = "",
                 rule: str = "corollary") -> AvailabilityReport:
    """Availability verdict for one metric model and one stopping rule.

    ``method`` is a :class:`DetectorKind` or a method name; windowed kinds
    take their window from ``config.m``.
    """
    kind = make_kind(method, config.m) if isinstance(method, str) else method
    rep = bound_report(model, kind, config.alpha_tilde, config.m, config.m_alpha, rule)
    return AvailabilityReport(
        metric=metric,
        method=kind,
        h=rep.h,
        alpha_bound=rep.alpha_bound,
        beta_bound=rep.beta_bound,
        beta_tilde=config.beta_tilde,
        available=rep.beta_bound <= config.beta_tilde,
        inputs={"m": config.m, "m_alpha": config.m_alpha, "alpha_tilde": config.alpha_tilde,
                "beta_tilde": config.beta_tilde, "rule": rule},
    )
