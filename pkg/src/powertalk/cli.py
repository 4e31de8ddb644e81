"""Command-line entry point.

Subcommands map one-to-one onto the experiment families plus two utilities::

    powertalk phase1-esnr  --config cfg --out out.csv [--seed N] [--trials N]
    powertalk ...
    powertalk design-quantizer --config cfg --out codebook.csv
    powertalk selftest

Exit codes: 0 success, 2 configuration/usage error, 3 a search budget guard
tripped.  Flag > config > default precedence; POWERTALK_LOG in
{error, info, debug} controls verbosity.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .config import build_experiment_config
from .errors import BudgetExceededError, ConfigError
from .experiments import FAMILY_SWEEP_VARS, run_sweep, write_csv

log = logging.getLogger("powertalk")


def _setup_logging() -> None:
    level = os.environ.get("POWERTALK_LOG", "info").lower()
    levels = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    if level not in levels:
        raise ConfigError(f"POWERTALK_LOG must be one of {sorted(levels)}, got '{level}'")
    logging.basicConfig(level=levels[level], format="%(levelname)s %(message)s")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="powertalk",
        description="Power-domain CSI acquisition/exchange experiments",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for family in FAMILY_SWEEP_VARS:
        p = sub.add_parser(family, help=f"run the {family} experiment")
        _add_run_flags(p)
    p = sub.add_parser("design-quantizer", help="design a gain codebook offline")
    _add_run_flags(p, trials=False)
    sub.add_parser("selftest", help="run the built-in sanity checks")
    return parser


def _add_run_flags(p: argparse.ArgumentParser, trials: bool = True) -> None:
    p.add_argument("--config", required=True, help="plain-text key=value config file")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--seed", type=int, default=None, help="override experiment.seed")
    if trials:
        p.add_argument("--trials", type=int, default=None, help="override experiment.trials")
    p.add_argument("--threads", type=int, default=None,
                   help="worker cap for sweep points (default: machine parallelism)")


def _run_design_quantizer(args) -> int:
    from .gain_quantizers import design_alma, design_lma, design_meq, export_codebook_csv, identity_pi
    from .priors import ExponentialPrior

    cfg, extras = build_experiment_config("design-quantizer", args.config)
    prior = ExponentialPrior(float(extras.get("prior_mean", 1.0)))
    if cfg.quantizer == "meq":
        quant = design_meq(prior, cfg.n_bits_ii)
    elif cfg.quantizer == "lma":
        quant = design_lma(prior, cfg.n_bits_ii, max_iter=cfg.alma_max_iter, delta=cfg.alma_delta)
    else:
        quant = design_alma(prior, cfg.n_bits_ii, identity_pi(2 ** cfg.n_bits_ii),
                            max_iter=cfg.alma_max_iter, delta=cfg.alma_delta)
    export_codebook_csv(quant, args.out)
    log.info("wrote %d-cell %s codebook to %s", quant.R, cfg.quantizer, args.out)
    return 0


def main(argv=None) -> int:
    try:
        _setup_logging()
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    parser = _build_parser()
    args = parser.parse_args(argv)

    try:
        if args.subcommand == "selftest":
            from .selftest import run_selftest

            failures = run_selftest()
            return 0 if failures == 0 else 1
        if args.subcommand == "design-quantizer":
            return _run_design_quantizer(args)

        overrides = {"seed": args.seed, "n_trials": args.trials}
        cfg, extras = build_experiment_config(args.subcommand, args.config, overrides)
        threads = args.threads or extras.get("threads") or os.cpu_count() or 1
        rows = run_sweep(cfg, threads=int(threads))
        write_csv(rows, args.out)
        log.info("wrote %d rows to %s", len(rows), args.out)
        return 0
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
