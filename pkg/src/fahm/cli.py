"""Command-line front end: run, sweep, elbow and bench modes.

Writes plot-ready CSV plus a JSON summary and a reproduction manifest
into the output directory. Exit codes: 0 success, 2 configuration
error (the message names the offending field), 3 numerical failure
(the message names the realization and scheme).
"""

from __future__ import annotations

import argparse
import datetime
import json
import os
import platform
import sys
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .config import (
    available_presets,
    config_snapshot,
    parse_config,
    parse_values,
    resolve_config_path,
)
from .simulate import (
    ConfigError,
    NumericalError,
    SWEEP_AXES,
    bench_timing,
    elbow_curve,
    run_scenario,
    sweep,
)

_EXIT_CONFIG = 2
_EXIT_NUMERICAL = 3

_INT_AXES = {"numPaths", "users", "selectedP"}


def _write_atomic(path: Path, text: str) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)  # shortest round-trip decimal
    return str(value)


def _gamma_tag(gamma: float) -> str:
    return f"{gamma:g}"


def _write_results_csv(path: Path, entries, gammas) -> None:
    """entries: (axis_name, axis_value, MetricsSummary) per axis point."""
    header = ["scheme", "axis_name", "axis_value", "user_mean_se", "sum_se", "se_stderr"]
    header += [f"op_gamma_{_gamma_tag(g)}" for g in gammas]
    header += ["mean_peff", "realizations"]
    lines = [",".join(header)]
    for axis_name, axis_value, summary in entries:
        for scheme in summary.schemes:
            row = [
                scheme.label,
                axis_name,
                _fmt(axis_value),
                _fmt(scheme.user_mean_se),
                _fmt(scheme.sum_se),
                _fmt(scheme.se_stderr),
            ]
            for g in gammas:
                est = scheme.outage.get(float(g))
                row.append(_fmt(est["probability"]) if est else "")
            row.append(_fmt(scheme.mean_peff))
            row.append(str(summary.realizations))
            lines.append(",".join(row))
    _write_atomic(path, "\n".join(lines) + "\n")


def _write_manifest(out_dir: Path, cfg, args, outputs, started, finished) -> None:
    manifest = {
        "tool": "fahm",
        "tool_version": __version__,
        "platform": {
            "python": sys.version.split()[0],
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "system": platform.platform(),
        },
        "command": {
            "mode": args.mode,
            "config": str(args.config),
            "axis": getattr(args, "axis", None),
            "values": getattr(args, "values", None),
            "threads": args.threads,
        },
        "master_seed": cfg.master_seed,
        "config_snapshot": config_snapshot(cfg),
        "started_at": started,
        "finished_at": finished,
        "outputs": [str(p.name) for p in outputs],
    }
    _write_atomic(out_dir / "manifest.json", json.dumps(manifest, indent=2) + "\n")


def _now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


def _prepare(args):
    path = resolve_config_path(args.config)
    cfg = parse_config(path, seed_override=args.seed)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    return cfg, out_dir


def _cmd_run(args) -> int:
    cfg, out_dir = _prepare(args)
    started = _now()
    summary = run_scenario(cfg, workers=args.threads)
    csv_path = out_dir / "results.csv"
    json_path = out_dir / "summary.json"
    _write_results_csv(csv_path, [("", "", summary)], cfg.gammas)
    _write_atomic(json_path, json.dumps(summary.to_dict(), indent=2) + "\n")
    _write_manifest(out_dir, cfg, args, [csv_path, json_path], started, _now())
    return 0


def _cmd_sweep(args) -> int:
    cfg, out_dir = _prepare(args)
    if args.axis not in SWEEP_AXES:
        raise ConfigError("axis", f"unknown sweep axis '{args.axis}' (choose from {SWEEP_AXES})")
    values = parse_values(args.values, integer=args.axis in _INT_AXES)
    started = _now()
    results = sweep(cfg, args.axis, values, workers=args.threads)
    gammas = tuple(float(v) for v in values) if args.axis == "gamma" else cfg.gammas
    entries = [(args.axis, value, summary) for value, summary in results]
    csv_path = out_dir / "results.csv"
    json_path = out_dir / "summary.json"
    _write_results_csv(csv_path, entries, gammas)
    payload = [
        {"axis": args.axis, "value": value, "summary": summary.to_dict()}
        for value, summary in results
    ]
    _write_atomic(json_path, json.dumps(payload, indent=2) + "\n")
    _write_manifest(out_dir, cfg, args, [csv_path, json_path], started, _now())
    return 0


def _cmd_elbow(args) -> int:
    cfg, out_dir = _prepare(args)
    started = _now()
    result = elbow_curve(cfg, workers=args.threads)
    lines = ["removedCount,meanLambda_dB"]
    for k, value in enumerate(result.mean_sinr):
        db = 10.0 * np.log10(value) if value > 0 else float("-inf")
        lines.append(f"{k},{_fmt(float(db))}")
    csv_path = out_dir / "results.csv"
    json_path = out_dir / "summary.json"
    _write_atomic(csv_path, "\n".join(lines) + "\n")
    payload = {
        "mean_ceil_peff": result.mean_ceil_peff,
        "mean_peff": result.mean_peff,
        "realizations": result.realizations,
        "n_ports": cfg.grid.n_ports,
    }
    _write_atomic(json_path, json.dumps(payload, indent=2) + "\n")
    _write_manifest(out_dir, cfg, args, [csv_path, json_path], started, _now())
    return 0


def _cmd_bench(args) -> int:
    cfg, out_dir = _prepare(args)
    started = _now()
    result = bench_timing(cfg)
    lines = ["scheme,median_ms,mean_ms"]
    for label, _kind, median_ms, mean_ms in result.rows:
        lines.append(f"{label},{_fmt(median_ms)},{_fmt(mean_ms)}")
    csv_path = out_dir / "results.csv"
    json_path = out_dir / "summary.json"
    _write_atomic(csv_path, "\n".join(lines) + "\n")
    _write_atomic(json_path, json.dumps(result.to_dict(), indent=2) + "\n")
    _write_manifest(out_dir, cfg, args, [csv_path, json_path], started, _now())
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "sweep": _cmd_sweep,
    "elbow": _cmd_elbow,
    "bench": _cmd_bench,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fahm",
        description="Monte Carlo link simulations for hybrid multiport fluid-antenna receivers.",
    )
    parser.add_argument("--version", action="version", version=f"fahm {__version__}")
    sub = parser.add_subparsers(dest="mode", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="scenario file path or preset name")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override master_seed")
        p.add_argument(
            "--threads",
            type=int,
            default=None,
            help="worker processes over realizations (capped by FAHM_MAX_WORKERS)",
        )

    run_p = sub.add_parser("run", help="run one scenario")
    common(run_p)

    sweep_p = sub.add_parser("sweep", help="sweep one scenario parameter")
    common(sweep_p)
    sweep_p.add_argument("--axis", required=True, help=f"one of {SWEEP_AXES}")
    sweep_p.add_argument("--values", required=True, help="'start:step:stop' or comma list")

    elbow_p = sub.add_parser("elbow", help="dominant-SINR decay under full elimination")
    common(elbow_p)

    bench_p = sub.add_parser("bench", help="fast vs naive selection runtime")
    common(bench_p)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.mode](args)
    except ConfigError as exc:
        print(f"fahm: config error: {exc}", file=sys.stderr)
        if args.mode in ("run", "sweep") and "preset" in str(exc):
            print(f"fahm: available presets: {', '.join(available_presets())}", file=sys.stderr)
        return _EXIT_CONFIG
    except NumericalError as exc:
        print(f"fahm: numerical failure: {exc}", file=sys.stderr)
        return _EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
