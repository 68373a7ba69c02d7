"""Command-line entry point.

Exit codes: 0 success, 1 invalid configuration, 2 divergence.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .analysis import table_to_csv
from .config import load_config, parse_config
from .errors import ConfigurationError, DivergenceError, SnapshotFormatError
from .presets import PRESETS
from .runner import convergence_study, run_experiment

EXIT_OK, EXIT_INVALID, EXIT_DIVERGED = 0, 1, 2

log = logging.getLogger("lisapml")


def _resolutions(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values or any(v < 2 for v in values):
        raise argparse.ArgumentTypeError("resolutions must be integers >= 2")
    return values


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lisapml", description="LISA acoustic wave engine with PML")
    p.add_argument("--serial", action="store_true", help="single-threaded sweeps")
    p.add_argument("--workers", type=int, default=None, help="row-sweep threads (default: all cores)")
    p.add_argument("--out", type=Path, default=None, help="output directory")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a config file or preset name")
    r.add_argument("config")

    c = sub.add_parser("convergence", help="error table over a list of resolutions")
    c.add_argument("preset")
    c.add_argument("--resolutions", type=_resolutions, default=[64, 128, 256, 512])
    c.add_argument("--reference", type=int, default=None,
                   help="reference resolution for self-convergence (default: twice the finest)")

    v = sub.add_parser("validate", help="check a config file and report every violation")
    v.add_argument("config")
    return p


def _load(spec: str):
    path = Path(spec)
    if path.exists():
        return load_config(path)
    if spec in PRESETS:
        return parse_config(f"[run]\npreset = {spec}\n")
    raise ConfigurationError(f"{spec!r} is neither a config file nor a preset name")


def _workers(args) -> int | None:
    return 1 if args.serial else args.workers


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "validate":
            cfg = _load(args.config)
            print(f"ok: {cfg.domain.n_x}x{cfg.domain.n_y} cells, tau={cfg.tau:.6g}, {cfg.n_steps} steps")
            return EXIT_OK

        if args.command == "run":
            cfg = _load(args.config)
            res = run_experiment(cfg, out_dir=args.out, workers=_workers(args))
            print(f"{res.steps_taken} steps to t={res.t:.6g}, peak |u|={res.peak_abs_u:.6e}, "
                  f"artifacts in {res.out_dir}")
            if res.report is not None:
                print(table_to_csv([res.report]), end="")
            if res.diverged:
                print(f"diverged at step {res.divergence_step}", file=sys.stderr)
                return EXIT_DIVERGED
            return EXIT_OK

        cfg = _load(args.preset)
        out = args.out if args.out is not None else Path(cfg.output_dir)
        if args.out is not None:
            cfg = replace(cfg, output_dir=str(args.out))
        table = convergence_study(cfg, args.resolutions, args.reference, workers=_workers(args), out_dir=out)
        print(table_to_csv(table), end="")
        return EXIT_OK
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except (ConfigurationError, SnapshotFormatError, OSError) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
