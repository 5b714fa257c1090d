"""Stopping rules on an LLR stream: Shewhart, CUSUM, window-limited CUSUM, FMA.

``Detector`` is the streaming engine (one sample at a time). ``stop_indices``
evaluates the same rules on a batch of equal-length streams at once and is
what the Monte-Carlo harness uses; both follow the same conventions:

* sample indices are 1-based,
* a statistic equal to the threshold raises the alarm,
* FMA and WLC are silent for the first ``m - 1`` samples.
"""

from __future__ import annotations

import collections
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .errors import DomainError, UsageError

METHODS = ("shewhart", "cusum", "wlc", "fma")
WINDOWED = ("wlc", "fma")

# exact recomputation period for the running window sum
_RESYNC_EVERY = 1 << 20


@dataclass(frozen=True)
class DetectorKind:
    method: str
    m: int = 1

    def __post_init__(self):
        if self.method not in METHODS:
            raise DomainError(f"unknown detector {self.method!r}; expected one of {METHODS}")
        if int(self.m) != self.m or self.m < 1:
            raise DomainError(f"window length must be a positive integer, got {self.m!r}")
        if self.method not in WINDOWED and self.m != 1:
            # window length is meaningless for these; normalise so equality works
            object.__setattr__(self, "m", 1)

    @property
    def windowed(self) -> bool:
        return self.method in WINDOWED

    @property
    def warmup(self) -> int:
        """First sample index at which the rule may stop."""
        return self.m if self.windowed else 1

    def __str__(self):
        return f"{self.method}(m={self.m})" if self.windowed else self.method


def shewhart() -> DetectorKind:
    return DetectorKind("shewhart")


def cusum() -> DetectorKind:
    return DetectorKind("cusum")


def wlc(m: int) -> DetectorKind:
    return DetectorKind("wlc", m)


def fma(m: int) -> DetectorKind:
    return DetectorKind("fma", m)


def make_kind(method: str, m: int) -> DetectorKind:
    """Build a kind from a method name, attaching ``m`` only where it matters."""
    method = method.lower()
    return DetectorKind(method, m if method in WINDOWED else 1)


@dataclass(frozen=True)
class Alarm:
    stop_index: int
    statistic_value: float


class Detector:
    """Streaming state for one stopping rule on one stream."""

    def __init__(self, kind: DetectorKind, h: float):
        self.kind = kind
        self.h = float(h)
        self.n = 0
        self.window = collections.deque(maxlen=kind.m)
        self.window_sum = 0.0
        self.cusum_acc = 0.0
        self.alarm: Optional[Alarm] = None

    @property
    def stopped(self) -> bool:
        return self.alarm is not None

    def statistic(self) -> float:
        """Current value of the test statistic (``-inf`` during warm-up)."""
        method = self.kind.method
        if method == "shewhart":
            return self.window[-1] if self.window else -np.inf
        if method == "cusum":
            return self.cusum_acc if self.n else -np.inf
        if self.n < self.kind.m:
            return -np.inf
        if method == "fma":
            return self.window_sum
        best = -np.inf
        acc = 0.0
        for value in reversed(self.window):
            acc += value
            best = max(best, acc)
        return best

    def step(self, llr_value: float) -> Optional[Alarm]:
        if self.stopped:
            raise UsageError(f"detector already stopped at n={self.alarm.stop_index}")
        x = float(llr_value)
        self.n += 1
        if len(self.window) == self.kind.m:
            self.window_sum -= self.window[0]
        self.window.append(x)
        self.window_sum += x
        if self.n % _RESYNC_EVERY == 0:
            self.window_sum = float(np.sum(np.fromiter(self.window, float)))
        if self.kind.method == "cusum":
            self.cusum_acc = max(self.cusum_acc, 0.0) + x
        stat = self.statistic()
        if stat >= self.h:
            self.alarm = Alarm(self.n, stat)
            return self.alarm
        return None


def run(kind: DetectorKind, h: float, llr_stream: Iterable[float]) -> Optional[Alarm]:
    """First alarm of ``kind`` at threshold ``h`` on a finite stream, or None."""
    det = Detector(kind, h)
    for value in llr_stream:
        alarm = det.step(value)
        if alarm is not None:
            return alarm
    return None


def statistics_matrix(kind: DetectorKind, llr: np.ndarray) -> np.ndarray:
    """Test statistic at every sample for a batch of streams (rows).

    Entries before the warm-up are ``-inf``.
    """
    llr = np.asarray(llr, dtype=float)
    if llr.ndim != 2:
        raise DomainError("expected a 2-D array of streams")
    runs, n = llr.shape
    method, m = kind.method, kind.m
    if method == "shewhart":
        return llr.copy()
    if method == "cusum":
        out = np.empty_like(llr)
        acc = np.zeros(runs)
        for j in range(n):
            np.maximum(acc, 0.0, out=acc)
            acc += llr[:, j]
            out[:, j] = acc
        return out
    out = np.full_like(llr, -np.inf)
    if n < m:
        return out
    if method == "fma":
        # same accumulation order as Detector.step so results are bit-identical
        s = np.zeros(runs)
        for j in range(n):
            if j >= m:
                s = s - llr[:, j - m]
            s = s + llr[:, j]
            if (j + 1) % _RESYNC_EVERY == 0:
                s = llr[:, j - m + 1:j + 1].sum(axis=1)
            if j >= m - 1:
                out[:, j] = s
        return out
    # WLC: max over suffix sums of the last m samples
    for j in range(m - 1, n):
        suffix = np.cumsum(llr[:, j - m + 1:j + 1][:, ::-1], axis=1)
        out[:, j] = suffix.max(axis=1)
    return out


def stop_indices(kind: DetectorKind, h: float, llr: np.ndarray) -> np.ndarray:
    """1-based stop index per stream; 0 where no alarm occurs."""
    stats = statistics_matrix(kind, llr)
    hit = stats >= h
    any_hit = hit.any(axis=1)
    first = hit.argmax(axis=1) + 1
    return np.where(any_hit, first, 0)
