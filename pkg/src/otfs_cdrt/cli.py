"""Command-line entry point: ``otfs-cdrt <command> ...``.

Exit codes: 0 success, 1 configuration or input error, 2 validation failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import replace

from .config import PRESETS, ConfigError, SweepConfig, load_config, load_preset
from .montecarlo import WORKERS_ENV, default_workers

EXIT_OK, EXIT_CONFIG, EXIT_VALIDATION = 0, 1, 2


def _load(args) -> SweepConfig:
    cfg = load_config(args.config) if args.config else load_preset(args.case)
    mc = cfg.mc
    if args.trials is not None:
        mc = replace(mc, trials=args.trials)
    if args.seed is not None:
        mc = replace(mc, master_seed=args.seed)
    if args.workers is not None:
        mc = replace(mc, parallelism=args.workers)
    elif WORKERS_ENV in os.environ:
        mc = replace(mc, parallelism=default_workers())
    return replace(cfg, mc=mc)


def cmd_sweep_outage(args) -> int:
    from .sweep import OUTAGE_COLUMNS, outage_rows, sweep_points, write_csv

    cfg = _load(args)
    rows = outage_rows(sweep_points(cfg, monte_carlo=not args.analytic_only))
    write_csv(rows, args.out, OUTAGE_COLUMNS)
    print(f"wrote {len(rows)} rows to {args.out}")
    return EXIT_OK


def cmd_sweep_sumrate(args) -> int:
    from .sweep import SUMRATE_COLUMNS, sumrate_rows, sweep_points, write_csv

    cfg = _load(args)
    rows = sumrate_rows(sweep_points(cfg, monte_carlo=not args.analytic_only), cfg)
    write_csv(rows, args.out, SUMRATE_COLUMNS)
    print(f"wrote {len(rows)} rows to {args.out}")
    return EXIT_OK


def cmd_validate_cf(args) -> int:
    from .validate import CDF_TOL_EXACT, CDF_TOL_MODEL, validate_cf

    cfg = _load(args)
    report = validate_cf(cfg, samples=args.samples, mu_scale=args.mu_scale)
    for c in report.checks:
        exact = "n/a" if c.sup_norm_exact is None else f"{c.sup_norm_exact:.2e}"
        print(f"{c.link:6s} G={c.G:<5d} sup|model|={c.sup_norm_model:.2e} "
              f"sup|exact|={exact} cf_axioms={'ok' if c.cf_ok else 'FAIL'} "
              f"{'PASS' if c.passed else 'FAIL'}")
    print(f"tolerances: model {CDF_TOL_MODEL}, exact {CDF_TOL_EXACT}")
    return EXIT_OK if report.passed else EXIT_VALIDATION


def cmd_plot(args) -> int:
    from .plotting import EmptyCsv, plot_csv

    try:
        paths = plot_csv(args.inp, args.out, fmt=args.format)
    except (EmptyCsv, OSError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for p in paths:
        print(f"wrote {p}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="otfs-cdrt", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def scenario_args(p):
        p.add_argument("--config", help="TOML scenario file (default: bundled preset)")
        p.add_argument("--case", choices=PRESETS, default="general",
                       help="bundled preset used when --config is absent")
        p.add_argument("--trials", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--workers", type=int, help=f"worker threads (env {WORKERS_ENV})")

    for name, fn, help_ in (
        ("sweep-outage", cmd_sweep_outage, "outage probability versus SNR"),
        ("sweep-sumrate", cmd_sweep_sumrate, "outage sum rate versus SNR"),
    ):
        p = sub.add_parser(name, help=help_)
        scenario_args(p)
        p.add_argument("--out", required=True, help="output CSV path")
        p.add_argument("--analytic-only", action="store_true", help="skip Monte Carlo")
        p.set_defaults(func=fn)

    p = sub.add_parser("validate-cf", help="check CF inversion against sampling oracles")
    scenario_args(p)
    p.add_argument("--samples", type=int, default=200_000)
    p.add_argument("--mu-scale", type=float, default=1.0,
                   help="multiply the tuned step (negative control)")
    p.set_defaults(func=cmd_validate_cf)

    p = sub.add_parser("plot", help="render a sweep CSV")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--format", default="svg", choices=("svg", "pdf", "png"))
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
