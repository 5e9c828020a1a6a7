"""Command-line entry point: ``uavnet simulate`` and ``uavnet plot``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .model import ConfigError, SimConfig, load_config, validate_config
from .radio import GridParseError, grid_to_pgm, read_grid_csv
from .sim import run

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


def cmd_plot(grid_csv_path, out_path) -> Path:
    """Render a grid CSV as a binary PGM."""
    out = Path(out_path)
    out.write_bytes(grid_to_pgm(read_grid_csv(grid_csv_path)))
    return out


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="uavnet", description="UAV base-station network simulator")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a scenario and write CSV artifacts")
    sim.add_argument("--config", type=Path, help="key = value scenario file (defaults if omitted)")
    sim.add_argument("--seed", type=int)
    sim.add_argument("--ticks", type=int)
    sim.add_argument("--out-dir", type=Path, default=Path("out"))
    sim.add_argument("--max-uavs", type=int)
    sim.add_argument("--grid-step", type=float)
    sim.add_argument("--kill-root-at", type=int, metavar="TICK")
    sim.add_argument("--pgm", action="store_true", help="also write PGM heatmaps of the SNR grids")

    plot = sub.add_parser("plot", help="convert an SNR grid CSV into a PGM image")
    plot.add_argument("--in", dest="grid", type=Path, required=True)
    plot.add_argument("--out", type=Path, required=True)
    return parser


def _resolve_config(args) -> SimConfig:
    cfg = load_config(args.config) if args.config else SimConfig()
    overrides = {
        "seed": args.seed,
        "ticks": args.ticks,
        "max_uavs": args.max_uavs,
        "grid_step": args.grid_step,
    }
    cfg = cfg.replace(**{k: v for k, v in overrides.items() if v is not None})
    return validate_config(cfg)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")

    if args.command == "plot":
        try:
            cmd_plot(args.grid, args.out)
        except (GridParseError, OSError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_RUNTIME
        return EXIT_OK

    try:
        cfg = _resolve_config(args)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        report = run(cfg, args.out_dir, kill_root_at=args.kill_root_at, pgm=args.pgm)
    except Exception as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME

    last = report.metrics[-1] if report.metrics else None
    print(f"{len(report.metrics)} ticks, {len([r for r in report.roster if r['role'] != 'suspended'])} active UAVs")
    if last is not None:
        print(f"final tick: offered {float(last.offered):.2f}, dropped {float(last.dropped):.2f}")
    for path, size in report.manifest:
        print(f"  {path} ({size} bytes)")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
