"""``tcdkit`` command line.

    tcdkit {threshold|bounds|roc|simulate|detect|availability} --config PATH
           [--out PATH] [--seed U64] [--runs N] [--threshold-rule RULE]
           [--input CSV]        # detect only

Reports are JSON (``"schema": 1``); grid data is CSV with ``#`` comment
lines before the column header. Exit codes: 0 ok, 2 configuration or input
error, 3 runtime/numerical error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .change_models import llr
from .config import RunConfig, load_config
from .detectors import Detector, make_kind
from .errors import ConfigError, FileError, TcdError
from .fma_bounds import bound_report
from .montecarlo import SimScenario, simulate_pfa, simulate_pmd, simulate_roc
from .sigraim import availability

SCHEMA = 1
EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3


class InputError(ConfigError):
    """Malformed sample-stream input."""


def _num(x: float):
    # JSON has no inf/nan
    return x if math.isfinite(x) else str(x)


def _emit(text: str, out: Optional[str]):
    if out is None:
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text, encoding="utf-8", newline="\n")
    except OSError as exc:
        raise FileError(f"{out}: cannot write output ({exc.strerror})") from None


def _json_report(command: str, cfg: RunConfig, rows: list) -> str:
    doc = {"schema": SCHEMA, "command": command, "config": cfg.source, "rows": rows}
    return json.dumps(doc, indent=2) + "\n"


def _csv_report(command: str, cfg: RunConfig, comments: list, columns: list, rows: list) -> str:
    buf = io.StringIO()
    buf.write(f"# tcdkit {command} schema={SCHEMA}\n")
    buf.write(f"# config: {cfg.source}\n")
    for line in comments:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def cmd_threshold(cfg: RunConfig) -> list:
    rows = []
    for e in cfg.metrics:
        for method in e.methods:
            kind = make_kind(method, e.tcd.m)
            for a in e.alpha_grid:
                rep = bound_report(e.model, kind, a, e.tcd.m, e.tcd.m_alpha, e.rule)
                rows.append({"metric": e.name, "method": method, "m": e.tcd.m,
                             "m_alpha": e.tcd.m_alpha, "alpha_tilde": a, "rule": e.rule,
                             "h": _num(rep.h)})
    return rows


def cmd_bounds(cfg: RunConfig) -> list:
    rows = []
    for e in cfg.metrics:
        for method in e.methods:
            kind = make_kind(method, e.tcd.m)
            for a in e.alpha_grid:
                rep = bound_report(e.model, kind, a, e.tcd.m, e.tcd.m_alpha, e.rule)
                row = {"metric": e.name, "method": method, "m": e.tcd.m, "m_alpha": e.tcd.m_alpha,
                       "alpha_tilde": a, "rule": e.rule, "h": _num(rep.h),
                       "alpha_bound": rep.alpha_bound, "beta_bound": rep.beta_bound}
                row.update(rep.extra)
                rows.append(row)
    return rows


ROC_COLUMNS = ["metric", "method", "alpha", "h", "pfa_bound", "pfa_hat", "pfa_stderr",
               "pmd_bound", "pmd_hat", "pmd_stderr"]


def cmd_roc(cfg: RunConfig) -> list:
    mc = cfg.montecarlo
    rows = []
    for e in cfg.metrics:
        for method in e.methods:
            kind = make_kind(method, e.tcd.m)
            for p in simulate_roc(e.model, kind, e.alpha_grid, e.tcd, mc.runs, mc.seed, e.rule,
                                  mc.workers):
                rows.append([e.name, method, p.alpha_target, p.h, p.pfa_bound, p.pfa_hat,
                             p.pfa_stderr, p.pmd_bound, p.pmd_hat, p.pmd_stderr])
    return rows


SIM_COLUMNS = ["metric", "method", "alpha", "h", "pfa_hat", "pfa_stderr", "pmd_hat",
               "pmd_stderr", "pmd_conditioned_runs", "runs", "seed"]


def cmd_simulate(cfg: RunConfig) -> list:
    mc = cfg.montecarlo
    rows = []
    for e in cfg.metrics:
        for method in e.methods:
            kind = make_kind(method, e.tcd.m)
            a = e.tcd.alpha_tilde
            rep = bound_report(e.model, kind, a, e.tcd.m, e.tcd.m_alpha, e.rule)
            s = SimScenario(e.model, kind, rep.h, e.tcd.m, e.tcd.m_alpha, None, mc.runs, mc.seed)
            pfa = simulate_pfa(s, mc.workers)
            pmd = simulate_pmd(s, mc.v or None, mc.workers)
            rows.append([e.name, method, a, rep.h, pfa.p_hat, pfa.stderr, pmd.p_hat, pmd.stderr,
                         pmd.runs, mc.runs, mc.seed])
    return rows


def read_stream(path) -> tuple[list, list, list]:
    """Parse an ``n,value[,timestamp]`` CSV into (n, value, timestamp) lists."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise FileError(f"{path}: cannot read input ({exc.strerror})") from None
    except UnicodeDecodeError:
        raise InputError(f"{path}: not valid UTF-8") from None
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise InputError(f"{path}: empty file")
    header = [h.strip() for h in lines[0].split(",")]
    if header[:2] != ["n", "value"] or header[2:] not in ([], ["timestamp"]):
        raise InputError(f"{path}: row 1: expected header 'n,value' (optionally ',timestamp'), got {lines[0]!r}")
    ns, values, stamps = [], [], []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != len(header):
            raise InputError(f"{path}: row {lineno}: expected {len(header)} fields, got {line!r}")
        try:
            n = int(parts[0])
            value = float(parts[1])
        except ValueError:
            raise InputError(f"{path}: row {lineno}: malformed row {line!r}") from None
        if not math.isfinite(value):
            raise InputError(f"{path}: row {lineno}: non-finite value {parts[1]!r}")
        if ns and n <= ns[-1]:
            raise InputError(f"{path}: row {lineno}: n must increase (got {n} after {ns[-1]})")
        ns.append(n)
        values.append(value)
        stamps.append(parts[2] if len(parts) > 2 else None)
    if not values:
        raise InputError(f"{path}: no data rows")
    return ns, values, stamps


def cmd_detect(cfg: RunConfig, csv_in) -> list:
    det = cfg.detect
    if det.metric is None:
        if len(cfg.metrics) != 1:
            raise ConfigError("[detect].metric: required when the config has several metrics")
        entry = cfg.metrics[0]
    else:
        entry = cfg.metric(det.metric)
    methods = det.methods or entry.methods
    ns, values, stamps = read_stream(csv_in)
    llrs = llr(entry.model, np.asarray(values))
    stream_id = det.stream_id or Path(csv_in).stem
    events = []
    for method in methods:
        kind = make_kind(method, entry.tcd.m)
        if method in det.h:
            h = det.h[method]
        else:
            h = bound_report(entry.model, kind, entry.tcd.alpha_tilde, entry.tcd.m,
                             entry.tcd.m_alpha, entry.rule).h
        d = Detector(kind, h)
        for value in llrs:
            alarm = d.step(float(value))
            if alarm is not None:
                i = alarm.stop_index
                events.append({"stream": stream_id, "metric": entry.name, "method": method,
                               "h": h, "alarm_index": i, "n": ns[i - 1],
                               "statistic": alarm.statistic_value, "timestamp": stamps[i - 1]})
                break
    return events


def cmd_availability(cfg: RunConfig) -> list:
    rows = []
    for e in cfg.metrics:
        for method in e.methods:
            r = availability(e.model, e.tcd, method, e.name, e.rule)
            rows.append({"metric": e.name, "method": method, "m": e.tcd.m,
                         "m_alpha": e.tcd.m_alpha, "alpha_tilde": e.tcd.alpha_tilde,
                         "beta_tilde": e.tcd.beta_tilde, "rule": e.rule, "h": _num(r.h),
                         "alpha_bound": r.alpha_bound, "beta_bound": r.beta_bound,
                         "available": r.available})
    return rows


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="TOML or JSON run configuration")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--seed", type=int, help="override [montecarlo].seed")
    common.add_argument("--runs", type=int, help="override [montecarlo].runs")
    common.add_argument("--threshold-rule", choices=["corollary", "quantile"],
                        help="FMA threshold rule for mean-change metrics")
    ap = argparse.ArgumentParser(prog="tcdkit", description="Transient change detection bounds, "
                                 "simulation and signal-integrity availability.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("threshold", parents=[common], help="thresholds per metric/method/alpha")
    sub.add_parser("bounds", parents=[common], help="analytic false-alarm and miss bounds")
    sub.add_parser("roc", parents=[common], help="analytic + simulated ROC as CSV")
    sub.add_parser("simulate", parents=[common], help="simulated Pfa/Pmd at alpha_tilde as CSV")
    p = sub.add_parser("detect", parents=[common], help="run detectors over a sample CSV")
    p.add_argument("--input", required=True, help="CSV with header n,value[,timestamp]")
    sub.add_parser("availability", parents=[common], help="sig-RAIM availability verdicts")
    return ap


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.threshold_rule)
        if args.seed is not None or args.runs is not None:
            from dataclasses import replace
            mc = cfg.montecarlo
            if args.runs is not None and args.runs < 1:
                raise ConfigError("--runs: must be >= 1")
            mc = replace(mc, seed=mc.seed if args.seed is None else args.seed,
                         runs=mc.runs if args.runs is None else args.runs)
            cfg = replace(cfg, montecarlo=mc)
        cmd = args.command
        if cmd in ("threshold", "bounds", "availability"):
            fn = {"threshold": cmd_threshold, "bounds": cmd_bounds,
                  "availability": cmd_availability}[cmd]
            text = _json_report(cmd, cfg, fn(cfg))
        elif cmd == "detect":
            text = _json_report(cmd, cfg, cmd_detect(cfg, args.input))
        else:
            mc = cfg.montecarlo
            comments = [f"runs={mc.runs} seed={mc.seed} workers-independent",
                        "alpha: target false-alarm level; h: threshold in LLR units",
                        "*_bound: analytic bound; *_hat: simulated estimate; *_stderr: binomial standard error"]
            if cmd == "roc":
                text = _csv_report(cmd, cfg, comments, ROC_COLUMNS, cmd_roc(cfg))
            else:
                comments.append("pmd_conditioned_runs: runs without alarm before the change onset")
                text = _csv_report(cmd, cfg, comments, SIM_COLUMNS, cmd_simulate(cfg))
        _emit(text, args.out)
    except ConfigError as exc:
        print(f"tcdkit: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TcdError as exc:
        print(f"tcdkit: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
