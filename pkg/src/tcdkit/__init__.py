"""Transient change detection: finite moving average stopping rule, analytic
false-alarm / missed-detection bounds, Monte-Carlo validation and
signal-level integrity availability."""

__version__ = "0.1.0"

from .change_models import (GaussianSpec, GeneralChange, Hypothesis, MeanChange, VarianceChange,
                            llr, llr_coeffs, tuned_from_error)
from .detectors import Alarm, Detector, DetectorKind, make_kind, run
from .errors import ConfigError, DomainError, NumericalError, TcdError, UsageError
from .fma_bounds import bound_report, bound_roc, bounds_at, fma_threshold, cusum_threshold
from .sigraim import TcdConfig, availability

__all__ = [
    "Alarm", "ConfigError", "Detector", "DetectorKind", "DomainError", "GaussianSpec",
    "GeneralChange", "Hypothesis", "MeanChange", "NumericalError", "TcdConfig", "TcdError",
    "UsageError", "VarianceChange", "availability", "bound_report", "bound_roc", "bounds_at",
    "cusum_threshold", "fma_threshold", "llr", "llr_coeffs", "make_kind", "run",
    "tuned_from_error",
]
