"""Command line entry point."""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import harness
from .config import load_config
from .errors import ConfigError, LatNagumoError


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="latnagumo",
        description="Stochastic nonlocal lattice Nagumo simulations and verification studies.",
    )
    sub = ap.add_subparsers(dest="command", required=True)
    for name in harness.COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="config file (dotted-key TOML)")
        p.add_argument("--out", type=Path, default=None, help="artifact directory")
        p.add_argument("--workers", type=int, default=None)
        p.add_argument("--seed", type=int, default=None, help="override rng.seed")
    p = sub.add_parser("rerun", help="repeat a run from its manifest")
    p.add_argument("manifest", type=Path)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--workers", type=int, default=None)
    p = sub.add_parser("plot", help="render a CSV table as SVG")
    p.add_argument("csv", type=Path)
    p.add_argument("--kind", choices=("lines", "heatmap"), default="lines")
    p.add_argument("--out", type=Path, default=None, help="SVG path (default: next to the CSV)")
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "plot":
            from .plot import plot

            print(plot(args.csv, args.kind, args.out))
            return 0
        if args.command == "rerun":
            return harness.report(harness.rerun(args.manifest, args.out, args.workers))
        if args.config is not None:
            cfg = load_config(args.config)
        else:
            from .config import resolve

            cfg = resolve({}, os.environ)
        if args.seed is not None:
            cfg["rng.seed"] = args.seed
        out = args.out or Path("out") / args.command
        return harness.report(harness.execute(args.command, cfg, out, args.workers))
    except (ConfigError, LatNagumoError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
