"""Command-line entry point.

::

    wignerlab run --config configs/glue_audit.cfg --out runs/glue
    wignerlab plot runs/scaling/results.csv --out runs/scaling
    wignerlab audit --n 3 --s 2
    wignerlab version

Exit status is 0 on success, 2 for a bad config or arguments, 3 when a
computation refuses to run (budget, eigensolver failures) and 4 for plot
input errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import __version__
from .config import ConfigError, parse_config
from .mc import THREADS_ENV, MonteCarloAbort
from .pathcomb import BudgetExceededError, audit_augmentation, audit_gluing
from .spectra import EigensolverError

__all__ = ["main", "build_parser"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wignerlab", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the experiment declared in a config file")
    run.add_argument("--config", required=True, help="flat key = value config file")
    run.add_argument("--out", help="output directory (overrides the config's 'out')")
    run.add_argument("--threads", type=int, help=f"worker threads (default ${THREADS_ENV} or 1)")
    run.add_argument("--plot", action="store_true", help="also write SVG plots")

    plot = sub.add_parser("plot", help="draw SVG plots from a results.csv")
    plot.add_argument("results", help="results.csv written by 'run'")
    plot.add_argument("--out", help="output directory (default: next to the CSV)")

    audit = sub.add_parser("audit", help="exhaustive gluing audit of closed path pairs")
    audit.add_argument("--n", type=int, default=3)
    audit.add_argument("--s", type=int, default=2)

    sub.add_parser("version", help="print the version stamp")
    return parser


def _cmd_run(args) -> int:
    from .experiments import run_experiment, write_results

    path = Path(args.config)
    try:
        cfg = parse_config(path.read_text())
    except OSError as exc:
        return _fail(f"cannot read config {path}: {exc.strerror}", 2)
    except ConfigError as exc:
        return _fail(f"{path}: {exc}", 2)
    out = args.out or cfg.out
    if not out:
        return _fail("no output directory: pass --out or set 'out' in the config", 2)
    if args.threads is not None and args.threads < 1:
        return _fail("--threads must be >= 1", 2)
    try:
        rows, summary = run_experiment(cfg, workers=args.threads)
    except (BudgetExceededError, MonteCarloAbort, EigensolverError) as exc:
        return _fail(str(exc), 3)
    except ValueError as exc:
        return _fail(f"{path}: {exc}", 2)
    try:
        csv_path, json_path = write_results(rows, summary, out)
    except OSError as exc:
        return _fail(f"cannot write to {out}: {exc.strerror}", 2)
    print(f"wrote {csv_path} ({len(rows)} rows) and {json_path}")
    if args.plot or cfg.plot:
        return _plot(csv_path, Path(out))
    return 0


def _plot(csv_path: Path, out_dir: Path) -> int:
    from .plotting import PlotError, plot_results

    try:
        written = plot_results(csv_path, out_dir)
    except (PlotError, OSError) as exc:
        return _fail(str(exc), 4)
    for path in written.values():
        print(f"wrote {path}")
    return 0


def _cmd_plot(args) -> int:
    csv_path = Path(args.results)
    if not csv_path.is_file():
        return _fail(f"no such file: {csv_path}", 4)
    return _plot(csv_path, Path(args.out) if args.out else csv_path.parent)


def _cmd_audit(args) -> int:
    try:
        audit = audit_gluing(args.n, args.s)
        standalone, extra = audit_augmentation(args.n, args.s)
    except BudgetExceededError as exc:
        return _fail(str(exc), 3)
    except ValueError as exc:
        return _fail(str(exc), 2)
    violations = audit.violations + extra
    print(f"n={args.n} s={args.s}")
    print(f"  pairs                {audit.pairs}")
    print(f"  correlated pairs     {audit.correlated_pairs}")
    print(f"  distinct glued paths {audit.distinct_glued}")
    print(f"  max preimage count   {audit.max_preimages} (bound {audit.preimage_bound})")
    print(f"  augmented paths      {audit.augmented + standalone}")
    print(f"  violations           {sum(violations.values())}")
    for name, count in sorted(violations.items()):
        print(f"    {name}: {count}")
    return 0 if not violations else 1


def _fail(message: str, code: int) -> int:
    print(f"wignerlab: error: {message}", file=sys.stderr)
    return code


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "threads", None) is not None:
        os.environ[THREADS_ENV] = str(args.threads)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "plot":
        return _cmd_plot(args)
    if args.command == "audit":
        return _cmd_audit(args)
    from .experiments import version_stamp

    print(version_stamp())
    return 0
