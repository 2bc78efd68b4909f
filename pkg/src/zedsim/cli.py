"""Command-line entry point: ``zedsim run | sweep | preset``.

Exit codes: 0 success, 1 runtime failure, 2 invalid configuration or
unknown preset.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path
from typing import Sequence

from . import config as cfgmod
from .config import ConfigError
from .engine import parse_axis, run, sweep, sweep_columns, write_csv
from .presets import PRESETS, get_preset


def _open_out(path: str | None):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", newline=""), True


def _write_trace(rows: list[dict], path: Path) -> None:
    cols: list[str] = []
    for r in rows:
        for k in r:
            if k not in cols:
                cols.append(k)
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)


def cmd_run(args) -> int:
    cfg = cfgmod.load(args.config)
    if args.seed is not None:
        cfg = cfg.replace_path("seed", args.seed)
    metrics = run(cfg, backend=args.backend, trace=args.trace is not None)
    text = json.dumps(metrics.summary(cfg), indent=2) + "\n"
    fh, close = _open_out(args.out)
    try:
        fh.write(text)
    finally:
        if close:
            fh.close()
    if args.trace is not None:
        _write_trace(metrics.trace or [], Path(args.trace))
    return 0


def cmd_sweep(args) -> int:
    cfg = cfgmod.load(args.config)
    axes: dict[str, list] = {k: list(v) for k, v in cfg.sweep.items()}
    for text in args.axes or []:
        path, values = parse_axis(text)
        axes[path] = values
    seeds = list(range(cfg.seed, cfg.seed + args.seeds))
    rows = sweep(cfg, axes, seeds, jobs=args.jobs)
    fh, close = _open_out(args.out)
    try:
        write_csv(rows, sweep_columns(rows, list(axes)), fh)
    finally:
        if close:
            fh.close()
    return 0


def cmd_preset(args) -> int:
    if args.action == "list":
        for p in PRESETS.values():
            print(f"{p.name:16s} {p.description}")
        return 0
    if not args.name:
        raise ConfigError([f"preset run needs a name; available: {', '.join(PRESETS)}"])
    preset = get_preset(args.name)
    columns, rows = preset.run(seeds=args.seeds, slots=args.slots, jobs=args.jobs)
    fh, close = _open_out(args.out)
    try:
        write_csv(rows, columns, fh)
    finally:
        if close:
            fh.close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="zedsim",
                                 description="Energy-information-aware device simulator")
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one scenario and print a JSON summary")
    r.add_argument("config", help="scenario TOML file")
    r.add_argument("--seed", type=int, help="override the master seed")
    r.add_argument("--trace", metavar="CSV", help="write a per-slot trace CSV")
    r.add_argument("--out", metavar="JSON", help="summary destination (default stdout)")
    r.add_argument("--backend", choices=("auto", "kernel", "reference"), default="auto")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="Cartesian parameter sweep to CSV")
    s.add_argument("config", help="scenario TOML file")
    s.add_argument("--axes", nargs="*", metavar="PATH=VALUES",
                   help="e.g. policy.period_slots=1..50 or workload.buffer_size=1,5")
    s.add_argument("--seeds", type=int, default=1, help="seeds per point, counted from seed")
    s.add_argument("--out", metavar="CSV", help="destination (default stdout)")
    s.add_argument("--jobs", type=int, default=1, help="worker processes")
    s.set_defaults(func=cmd_sweep)

    p = sub.add_parser("preset", help="list or run a built-in preset")
    p.add_argument("action", choices=("list", "run"))
    p.add_argument("name", nargs="?")
    p.add_argument("--out", metavar="CSV", help="destination (default stdout)")
    p.add_argument("--seeds", type=int, help="number of seeds (default: preset's own)")
    p.add_argument("--slots", type=int, help="override the slot count")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.set_defaults(func=cmd_preset)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - report any runtime failure as exit 1
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
