"""Command line entry point: ``surfverify {run,table,series}``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import KSTAR_MODES, LINF_MODES, ConfigError, load_config, load_rows
from .evolve import SimulationError
from .plotdata import MissingArtifact, export_panels
from .runner import LongRunError, format_time, run_experiment
from .table import render, run_table, write_table_csv


def _overrides(args) -> dict:
    tstar = {"table": "table", "theorem": "theorem", None: None}[args.tstar]
    return {"linf_mode": args.linf, "kstar_mode": args.kstar, "t_star_mode": tstar}


def _cmd_run(args) -> int:
    cfg = load_config(args.config).with_overrides(**_overrides(args))
    if args.output_dir:
        cfg = cfg.with_overrides(output_dir=args.output_dir)
    report = run_experiment(cfg, allow_long=args.long)
    print(f"u0 = {cfg.initial_data}   N = {cfg.n_modes}   h = {cfg.dt:g}   "
          f"t_end = {cfg.horizon:g}   T* = {cfg.t_star:.4g} ({cfg.t_star_mode})")
    for m, v in report.verdicts.items():
        print(f"  {m}: smallness {format_time(v.smallness_time):>6}   "
              f"valid until {format_time(v.valid_until):>6}   "
              f"time criterion {'met' if v.time_criterion_met else 'not met'}   "
              f"regular: {'yes' if v.globally_regular else 'no'}")
    print(f"outputs in {cfg.output_dir}")
    return 0


def _cmd_table(args) -> int:
    rows = load_rows(args.rowfile)
    out = Path(args.output_dir or Path(args.rowfile).with_suffix(""))
    results = run_table(rows, out, allow_long=args.long, jobs=args.jobs,
                        overrides=_overrides(args))
    out.mkdir(parents=True, exist_ok=True)
    write_table_csv(out / "table.csv", results)
    print(render(results), end="")
    print(f"table written to {out / 'table.csv'}")
    return 0


def _cmd_series(args) -> int:
    written = export_panels(args.run_dir, args.output_dir)
    for name, path in written.items():
        print(f"{name}: {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--long", action="store_true",
                        help="allow runs with h <= 1e-6 beyond t = 1")
    common.add_argument("--linf", choices=LINF_MODES, help="evaluation of ||phi_xx||_inf")
    common.add_argument("--kstar", choices=KSTAR_MODES, help="method-1 threshold")
    common.add_argument("--tstar", choices=("theorem", "table"), help="T* convention")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="surfverify",
                                     description="A-posteriori regularity checks for the "
                                                 "surface growth equation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", parents=[common], help="run one experiment from a config file")
    p.add_argument("config")
    p.add_argument("-o", "--output-dir")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("table", parents=[common], help="run every row of a table file")
    p.add_argument("rowfile")
    p.add_argument("-o", "--output-dir")
    p.add_argument("-j", "--jobs", type=int, default=None)
    p.set_defaults(func=_cmd_table)

    p = sub.add_parser("series", help="export plot-ready CSV panels of a finished run")
    p.add_argument("run_dir")
    p.add_argument("-o", "--output-dir")
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=_cmd_series)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
    except (LongRunError, SimulationError, MissingArtifact, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return 2


if __name__ == "__main__":
    sys.exit(main())
