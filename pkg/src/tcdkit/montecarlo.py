"""Seeded Monte-Carlo estimates of worst-case false-alarm and miss probabilities.

Random numbers
--------------
Runs are split into fixed blocks of ``BLOCK_RUNS``. Block ``b`` of stream
``s`` under seed ``seed`` draws from a Philox-4x64 counter generator keyed by
``seed + 2**64 * (s + 2**16 * b)``; raw 64-bit words become uniforms on the
open interval (0, 1) through their top 53 bits, and Gaussian variates are
obtained by the inverse normal cdf. Results therefore depend only on
(seed, runs) and never on how many workers process the blocks.

Windows
-------
Under no change, FMA and WLC statistics form a stationary sequence from
``n = m`` on, so the worst false-alarm window starts at ``m``; a run needs
``m + m_alpha - 1`` samples. Shewhart and CUSUM use the window starting at 1.
A missed-detection run puts the change at ``v`` (default ``m + 1``) and needs
``v + m - 1`` samples.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.special import ndtri

from .change_models import ChangeModel, Hypothesis, llr
from .detectors import DetectorKind, statistics_matrix, stop_indices
from .errors import DomainError, NumericalError
from .fma_bounds import bound_report

BLOCK_RUNS = 4096
_STREAM_PFA = 0
_STREAM_PMD = 1
_STREAM_ASSOC = 2
_STREAM_WINDOW = 3


@dataclass(frozen=True)
class SimScenario:
    model: ChangeModel
    kind: DetectorKind
    h: float
    m: int
    m_alpha: int
    v: Optional[int] = None
    runs: int = 10_000
    seed: int = 0

    def __post_init__(self):
        if self.runs < 1:
            raise DomainError(f"runs must be >= 1, got {self.runs!r}")
        if self.v is not None and self.v <= self.m:
            raise DomainError(f"change onset v={self.v} must exceed m={self.m}")


@dataclass(frozen=True)
class SimEstimate:
    p_hat: float
    stderr: float
    runs: int
    seed: int
    events: int = 0


@dataclass(frozen=True)
class RocPoint:
    alpha_target: float
    h: float
    pfa_bound: float
    pfa_hat: float
    pfa_stderr: float
    pmd_bound: float
    pmd_hat: float
    pmd_stderr: float


def _estimate(events: int, trials: int, seed: int) -> SimEstimate:
    p = events / trials
    return SimEstimate(p, math.sqrt(p * (1.0 - p) / trials), trials, seed, events)


def block_uniforms(seed: int, stream: int, block: int, shape) -> np.ndarray:
    """Uniforms on (0, 1) for one block of runs (rows)."""
    key = (int(seed) % (1 << 64)) + ((stream + (block << 16)) << 64)
    bitgen = np.random.Philox(key=key)
    raw = bitgen.random_raw(int(np.prod(shape)))
    return (((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0 ** -53).reshape(shape)


def _block_sizes(runs: int):
    full, rest = divmod(runs, BLOCK_RUNS)
    sizes = [BLOCK_RUNS] * full
    if rest:
        sizes.append(rest)
    return sizes


def _block_llr(model: ChangeModel, n: int, change: Optional[tuple[int, int]], seed: int,
               stream: int, block: int, rows: int) -> np.ndarray:
    """LLR matrix ``rows x n``; columns ``change[0]..change[1]`` (1-based) are post-change."""
    z = ndtri(block_uniforms(seed, stream, block, (rows, n)))
    pre = model.metric(Hypothesis.H0)
    mu = np.full(n, pre.mu)
    sd = np.full(n, pre.sigma)
    if change is not None:
        post = model.metric(Hypothesis.H1)
        mu[change[0] - 1:change[1]] = post.mu
        sd[change[0] - 1:change[1]] = post.sigma
    return llr(model, mu + sd * z)


def _block_stops(args) -> np.ndarray:
    model, kind, h, n, change, seed, stream, block, rows = args
    return stop_indices(kind, h, _block_llr(model, n, change, seed, stream, block, rows))


def simulate_stops(model: ChangeModel, kind: DetectorKind, h: float, n: int, runs: int,
                   seed: int, change: Optional[tuple[int, int]] = None, stream: int = 0,
                   workers: int = 1) -> np.ndarray:
    """Stop index (1-based, 0 = no alarm within ``n``) for each of ``runs`` runs."""
    jobs = [(model, kind, h, n, change, seed, stream, b, rows)
            for b, rows in enumerate(_block_sizes(runs))]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_block_stops, jobs))
    else:
        parts = [_block_stops(j) for j in jobs]
    return np.concatenate(parts)


def window_pfa(s: SimScenario, start: int, workers: int = 1) -> SimEstimate:
    """P(start <= T < start + m_alpha) with no change."""
    if start < 1:
        raise DomainError(f"window start must be >= 1, got {start!r}")
    n = start + s.m_alpha - 1
    stops = simulate_stops(s.model, s.kind, s.h, n, s.runs, s.seed, stream=_STREAM_WINDOW,
                           workers=workers)
    return _estimate(int(np.count_nonzero(stops >= start)), s.runs, s.seed)


def simulate_pfa(s: SimScenario, workers: int = 1) -> SimEstimate:
    """Worst-case false-alarm probability over one ``m_alpha`` window."""
    start = s.kind.warmup
    n = start + s.m_alpha - 1
    stops = simulate_stops(s.model, s.kind, s.h, n, s.runs, s.seed, stream=_STREAM_PFA,
                           workers=workers)
    return _estimate(int(np.count_nonzero(stops >= start)), s.runs, s.seed)


def _pmd_at(s: SimScenario, v: int, workers: int) -> SimEstimate:
    n = v + s.m - 1
    stops = simulate_stops(s.model, s.kind, s.h, n, s.runs, s.seed, change=(v, n),
                           stream=_STREAM_PMD, workers=workers)
    survivors = int(np.count_nonzero((stops == 0) | (stops >= v)))
    missed = int(np.count_nonzero(stops == 0))
    if survivors == 0:
        raise NumericalError(
            f"all {s.runs} runs alarmed before the change at v={v}; "
            f"conditional miss probability undefined (survivors=0, h={s.h})")
    return _estimate(missed, survivors, s.seed)


def simulate_pmd(s: SimScenario, v_sweep: Optional[Sequence[int]] = None,
                 workers: int = 1) -> SimEstimate:
    """P(T >= v + m | T >= v) with the actual change on ``[v, v + m)``.

    With ``v_sweep`` every onset is simulated and the largest estimate kept.
    """
    onsets = list(v_sweep) if v_sweep else [s.v if s.v is not None else s.m + 1]
    for v in onsets:
        if v <= s.m:
            raise DomainError(f"change onset v={v} must exceed m={s.m}")
    return max((_pmd_at(s, v, workers) for v in onsets), key=lambda e: e.p_hat)


def simulate_roc(model: ChangeModel, kind: DetectorKind, alpha_grid: Iterable[float], config,
                 runs: int, seed: int, rule: str = "corollary", workers: int = 1) -> list[RocPoint]:
    """Analytic thresholds per method, with both probabilities simulated."""
    points = []
    for a in sorted(float(x) for x in alpha_grid):
        rep = bound_report(model, kind, a, config.m, config.m_alpha, rule)
        s = SimScenario(model, kind, rep.h, config.m, config.m_alpha, None, runs, seed)
        pfa = simulate_pfa(s, workers)
        pmd = simulate_pmd(s, workers=workers)
        points.append(RocPoint(a, rep.h, rep.alpha_bound, pfa.p_hat, pfa.stderr,
                               rep.beta_bound, pmd.p_hat, pmd.stderr))
    return points


def check_association(model: ChangeModel, h: float, N: int, runs: int, seed: int,
                      m: int = 6) -> tuple[SimEstimate, SimEstimate]:
    """Estimate P(S_m < h, ..., S_{m+N-1} < h) and P(S_m < h)**N under no change.

    The right-hand estimate's standard error comes from the delta method.
    """
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N!r}")
    n = m + N - 1
    all_below = 0
    first_below = 0
    for b, rows in enumerate(_block_sizes(runs)):
        stats = statistics_matrix(DetectorKind("fma", m), _block_llr(model, n, None, seed,
                                                                     _STREAM_ASSOC, b, rows))
        below = stats[:, m - 1:] < h
        all_below += int(np.count_nonzero(below.all(axis=1)))
        first_below += int(np.count_nonzero(below[:, 0]))
    lhs = _estimate(all_below, runs, seed)
    p = first_below / runs
    se_p = math.sqrt(p * (1.0 - p) / runs)
    rhs = SimEstimate(p ** N, N * p ** (N - 1) * se_p, runs, seed, first_below)
    return lhs, rhs


def sample_sums(model: ChangeModel, m: int, hypothesis: Hypothesis, runs: int,
                seed: int) -> np.ndarray:
    """``runs`` independent draws of the ``m``-sample LLR sum."""
    change = (1, m) if hypothesis is Hypothesis.H1 else None
    stream = 10 + hypothesis.value
    parts = [_block_llr(model, m, change, seed, stream, b, rows).sum(axis=1)
             for b, rows in enumerate(_block_sizes(runs))]
    return np.concatenate(parts)
