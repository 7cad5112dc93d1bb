"""Command-line experiment runner.

Subcommands mirror the experiment kinds; each takes --config / --out /
--seed / --parallelism. The SKILLCOMP_OUT environment variable overrides
the output root. Exit codes: 0 all trials completed, 1 invalid config,
2 one or more trials diverged (reported, run continues).
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .config import EXPERIMENT_KINDS, ConfigError, load_config
from .runner import run_experiment


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="skillcomp",
        description="Reproducible experiments for skill-composition learning "
        "under uniform vs power-law sampling.",
    )
    sub = parser.add_subparsers(dest="kind", required=True)
    for kind in EXPERIMENT_KINDS:
        p = sub.add_parser(kind, help=f"run a {kind} experiment from a config file")
        p.add_argument("--config", required=True, help="path to the JSON config")
        p.add_argument("--out", default=None, help="output directory (default: config 'out')")
        p.add_argument("--parallelism", type=int, default=1, help="max concurrent trials")
        p.add_argument("--seed", type=int, default=None, help="override the config root seed")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return 1
    if config["kind"] != args.kind:
        print(
            f"config kind {config['kind']!r} does not match subcommand {args.kind!r}",
            file=sys.stderr,
        )
        return 1
    if args.seed is not None:
        config["seed"] = args.seed
    out = args.out or config.get("out")
    if out is None:
        print("no output directory: pass --out or set 'out' in the config", file=sys.stderr)
        return 1
    root = os.environ.get("SKILLCOMP_OUT")
    out_dir = Path(root) / out if root else Path(out)
    try:
        result = run_experiment(config, out_dir, parallelism=args.parallelism)
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return 1
    for name in sorted(result.files):
        print(f"wrote {out_dir / name}")
    if result.diverged:
        print(f"{len(result.diverged)} trial(s) diverged: {result.diverged}", file=sys.stderr)
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
