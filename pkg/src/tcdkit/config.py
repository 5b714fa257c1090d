"""Run configuration: TOML (or JSON) file -> validated :class:`RunConfig`.

Layout::

    [tcd]                  # defaults shared by all metrics
    m = 6                  # or fs/t_tta (and fs/t_alpha for m_alpha)
    m_alpha = 60
    alpha_tilde = 0.01
    beta_tilde = 0.01
    alpha_grid = [0.001, 0.01, 0.1]
    methods = ["fma", "cusum", "wlc"]
    threshold_rule = "corollary"

    [metric.cn0]           # type inferred from cn0/dll/sam, or set `type`
    mu0 = ...              # any [tcd] key may be overridden per metric

    [montecarlo]
    runs = 10000
    seed = 1
    v = [7]                # optional onset sweep
    workers = 1

    [detect]
    metric = "cn0"
    methods = ["fma", "cusum"]
    h = { fma = 3.0 }      # optional; otherwise from alpha_tilde
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .change_models import (ChangeModel, GaussianSpec, GeneralChange, MeanChange, VarianceChange,
                            tuned_from_error)
from .detectors import METHODS
from .errors import ConfigError, DomainError, FileError
from .fma_bounds import THRESHOLD_RULES
from .sigraim import TcdConfig

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

_TCD_KEYS = {"m", "m_alpha", "alpha_tilde", "beta_tilde", "fs", "t_tta", "t_alpha",
             "alpha_grid", "methods", "threshold_rule"}
_MODEL_KEYS = {
    "mean": {"mu0", "sigma2", "mu1_tuned", "mu1_actual"},
    "variance": {"sigma2_0", "sigma2_1_tuned", "sigma2_1_actual"},
    "general": {"mu0", "sigma2_0", "mu1_tuned", "sigma2_1_tuned", "mu1_actual", "sigma2_1_actual"},
}
_TYPE_BY_NAME = {"cn0": "mean", "dll": "variance", "sam": "general"}
_MC_KEYS = {"runs", "seed", "v", "workers"}
_DETECT_KEYS = {"metric", "methods", "h", "stream_id"}


@dataclass(frozen=True)
class MetricEntry:
    name: str
    model: ChangeModel
    tcd: TcdConfig
    rule: str
    methods: tuple
    alpha_grid: tuple


@dataclass(frozen=True)
class MonteCarloSettings:
    runs: int = 10_000
    seed: int = 0
    v: tuple = ()
    workers: int = 1


@dataclass(frozen=True)
class DetectSettings:
    metric: Optional[str] = None
    methods: tuple = ()
    h: dict = field(default_factory=dict)
    stream_id: Optional[str] = None


@dataclass(frozen=True)
class RunConfig:
    metrics: tuple
    montecarlo: MonteCarloSettings
    detect: DetectSettings
    source: Optional[str] = None

    def metric(self, name: str) -> MetricEntry:
        for entry in self.metrics:
            if entry.name == name:
                return entry
        raise ConfigError(f"detect.metric: no metric named {name!r}")


def _unknown(section: str, table: dict, allowed: set):
    extra = sorted(set(table) - allowed)
    if extra:
        raise ConfigError(f"[{section}]: unknown key(s) {', '.join(extra)}")


def _get(section: str, table: dict, key: str, kind=float, required=True):
    if key not in table:
        if required:
            raise ConfigError(f"[{section}]: missing required key {key!r}")
        return None
    value = table[key]
    try:
        if kind is int:
            if isinstance(value, bool) or int(value) != value:
                raise ValueError
            return int(value)
        if isinstance(value, bool):
            raise ValueError
        return kind(value)
    except (TypeError, ValueError):
        raise ConfigError(f"[{section}].{key}: expected {kind.__name__}, got {value!r}") from None


def _build_tcd(section: str, table: dict) -> TcdConfig:
    alpha = _get(section, table, "alpha_tilde")
    beta = _get(section, table, "beta_tilde")
    m = _get(section, table, "m", int, required=False)
    m_alpha = _get(section, table, "m_alpha", int, required=False)
    fs = _get(section, table, "fs", required=False)
    t_tta = _get(section, table, "t_tta", required=False)
    t_alpha = _get(section, table, "t_alpha", required=False)
    if m is None and (fs is None or t_tta is None):
        raise ConfigError(f"[{section}]: need m, or fs and t_tta")
    if m_alpha is None and (fs is None or t_alpha is None):
        raise ConfigError(f"[{section}]: need m_alpha, or fs and t_alpha")
    if fs is not None:
        return TcdConfig.from_times(fs, t_tta if t_tta is not None else m / fs,
                                    t_alpha if t_alpha is not None else m_alpha / fs,
                                    alpha, beta, m, m_alpha)
    return TcdConfig(m, m_alpha, alpha, beta)


def _build_model(section: str, kind: str, t: dict) -> ChangeModel:
    t = dict(t)
    if "error_table" in t or "epsilon" in t:
        if "error_table" not in t or "epsilon" not in t:
            raise ConfigError(f"[{section}]: error_table and epsilon go together")
        tuned = tuned_from_error([tuple(row) for row in t.pop("error_table")], float(t.pop("epsilon")))
        if kind == "mean":
            t["mu1_tuned"] = tuned
        elif kind == "variance":
            t["sigma2_1_tuned"] = tuned
        else:
            if not isinstance(tuned, tuple) or len(tuned) != 2:
                raise ConfigError(f"[{section}].error_table: general metrics need (mu, sigma2) pairs")
            t["mu1_tuned"], t["sigma2_1_tuned"] = tuned
    _unknown(section, t, _MODEL_KEYS[kind])
    g = lambda key, required=True: _get(section, t, key, required=required)
    if kind == "mean":
        return MeanChange(g("mu0"), g("sigma2"), g("mu1_tuned"), g("mu1_actual", False))
    if kind == "variance":
        return VarianceChange(g("sigma2_0"), g("sigma2_1_tuned"), g("sigma2_1_actual", False))
    pre = GaussianSpec(g("mu0"), g("sigma2_0"))
    tuned = GaussianSpec(g("mu1_tuned"), g("sigma2_1_tuned"))
    mu_a, s_a = g("mu1_actual", False), g("sigma2_1_actual", False)
    actual = None
    if mu_a is not None or s_a is not None:
        actual = GaussianSpec(tuned.mu if mu_a is None else mu_a, tuned.sigma2 if s_a is None else s_a)
    return GeneralChange(pre, tuned, actual)


def _methods(section: str, value) -> tuple:
    if isinstance(value, str) or not isinstance(value, (list, tuple)) or not value:
        raise ConfigError(f"[{section}].methods: expected a non-empty list of names")
    out = []
    for name in value:
        if str(name).lower() not in METHODS:
            raise ConfigError(f"[{section}].methods: unknown method {name!r}; expected one of {METHODS}")
        out.append(str(name).lower())
    return tuple(out)


def _alpha_grid(section: str, value) -> tuple:
    if not isinstance(value, (list, tuple)) or not value:
        raise ConfigError(f"[{section}].alpha_grid: expected a non-empty list")
    grid = []
    for a in value:
        if isinstance(a, bool) or not isinstance(a, (int, float)) or not 0.0 < a < 1.0:
            raise ConfigError(f"[{section}].alpha_grid: values must lie in (0, 1), got {a!r}")
        grid.append(float(a))
    return tuple(sorted(grid))


def parse_config(data: dict, source: Optional[str] = None,
                 rule_override: Optional[str] = None) -> RunConfig:
    _unknown("top level", data, {"tcd", "metric", "montecarlo", "detect"})
    tcd_defaults = dict(data.get("tcd", {}))
    _unknown("tcd", tcd_defaults, _TCD_KEYS)
    raw_metrics = data.get("metric", {})
    if not isinstance(raw_metrics, dict) or not raw_metrics:
        raise ConfigError("no models: the config defines no [metric.<name>] sections")
    if rule_override is not None and rule_override not in THRESHOLD_RULES:
        raise ConfigError(f"--threshold-rule: expected one of {THRESHOLD_RULES}, got {rule_override!r}")

    metrics = []
    for name, table in raw_metrics.items():
        section = f"metric.{name}"
        if not isinstance(table, dict):
            raise ConfigError(f"[{section}]: expected a table")
        table = dict(table)
        kind = table.pop("type", _TYPE_BY_NAME.get(name))
        if kind not in _MODEL_KEYS:
            raise ConfigError(f"[{section}].type: expected one of {sorted(_MODEL_KEYS)}, got {kind!r}")
        merged = dict(tcd_defaults)
        for key in list(table):
            if key in _TCD_KEYS:
                merged[key] = table.pop(key)
        try:
            model = _build_model(section, kind, table)
            tcd = _build_tcd(section, merged)
        except DomainError as exc:
            raise ConfigError(f"[{section}]: {exc}") from None
        rule = rule_override or merged.get("threshold_rule", "corollary")
        if rule not in THRESHOLD_RULES:
            raise ConfigError(f"[{section}].threshold_rule: expected one of {THRESHOLD_RULES}, got {rule!r}")
        methods = _methods(section, merged.get("methods", ["fma", "cusum", "wlc"]))
        grid = _alpha_grid(section, merged.get("alpha_grid", [tcd.alpha_tilde]))
        metrics.append(MetricEntry(name, model, tcd, rule, methods, grid))

    mc = dict(data.get("montecarlo", {}))
    _unknown("montecarlo", mc, _MC_KEYS)
    v = mc.get("v", [])
    v = (v,) if isinstance(v, int) else tuple(int(x) for x in v)
    defaults = MonteCarloSettings()
    settings = {}
    for key in ("runs", "seed", "workers"):
        value = _get("montecarlo", mc, key, int, required=False)
        settings[key] = getattr(defaults, key) if value is None else value
    montecarlo = MonteCarloSettings(v=v, **settings)
    if montecarlo.runs < 1:
        raise ConfigError("[montecarlo].runs: must be >= 1")
    if montecarlo.workers < 1:
        raise ConfigError("[montecarlo].workers: must be >= 1")

    det = dict(data.get("detect", {}))
    _unknown("detect", det, _DETECT_KEYS)
    h = det.get("h", {})
    if not isinstance(h, dict):
        raise ConfigError("[detect].h: expected a table of method = threshold")
    detect = DetectSettings(
        metric=det.get("metric"),
        methods=_methods("detect", det["methods"]) if "methods" in det else (),
        h={str(k).lower(): _get("detect.h", h, k) for k in h},
        stream_id=det.get("stream_id"),
    )
    return RunConfig(tuple(metrics), montecarlo, detect, source)


def load_config(path, rule_override: Optional[str] = None) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise FileError(f"{path}: cannot read config ({exc.strerror})") from None
    except UnicodeDecodeError:
        raise ConfigError(f"{path}: not valid UTF-8") from None
    try:
        if path.suffix.lower() == ".json":
            data = json.loads(text)
        else:
            data = tomllib.loads(text)
    except (tomllib.TOMLDecodeError, json.JSONDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from None
    try:
        return parse_config(data, str(path), rule_override)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None
