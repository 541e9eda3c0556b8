"""Command-line entry point: run, compare and scan scenarios."""

from __future__ import annotations

import argparse
import os
import sys

from .harness import (ConfigError, InvariantViolation, load_scenario,
                      run_comparison, run_scenario, run_surface_scan)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="suntrack",
        description="Power-feedback sun-tracking simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
            ("run", "simulate one day with the configured controller"),
            ("compare", "closed loop vs 60 s / 120 s open loop, same plant"),
            ("scan", "raster the power surface and recover the 90% contour")):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("scenario", help="scenario configuration file")
        cmd.add_argument("--out", default=None,
                         help="output directory (default: out/<scenario name>)")
        cmd.add_argument("--seed", type=int, default=None,
                         help="override the scenario seed")
        cmd.add_argument("--set", dest="overrides", action="append",
                         default=[], metavar="KEY=VALUE",
                         help="override any dotted scenario key (repeatable)")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    overrides = list(args.overrides)
    if args.seed is not None:
        overrides.append(f"scenario.seed={args.seed}")
    try:
        cfg = load_scenario(args.scenario, overrides)
    except (OSError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    out_dir = args.out or os.path.join("out", cfg.name)
    try:
        if args.command == "run":
            metrics = run_scenario(cfg, out_dir)
            print(f"scenario {cfg.name}: mean daylight efficiency "
                  f"{metrics.mean_daylight_efficiency:.4f}, "
                  f"{metrics.movements_total} movements, "
                  f"{metrics.energy_wh:.0f} Wh -> {out_dir}")
        elif args.command == "compare":
            result = run_comparison(cfg, out_dir)
            print(f"closed {result.closed.mean_daylight_efficiency:.4f} vs "
                  f"open(60s) {result.open_60.mean_daylight_efficiency:.4f} / "
                  f"open(120s) {result.open_120.mean_daylight_efficiency:.4f}; "
                  f"gain vs 120s {100 * result.gain_vs_open_120:.1f}% "
                  f"-> {out_dir}")
        else:
            result = run_surface_scan(cfg, out_dir)
            print(f"recovered half-acceptance angle "
                  f"{result.alpha_recovered:.3f} deg -> {out_dir}")
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
