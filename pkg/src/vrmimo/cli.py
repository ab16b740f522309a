"""Command-line interface.

    vrmimo sweep-d --out sweep.csv
    vrmimo single --placement worst --d 30 --normalization trace-m --out -
    vrmimo validate
    vrmimo epsilon-study --out eps.csv

Every option mirrors a config-file key; ``--config FILE`` loads a flat
``key = value`` file first and explicit flags override it.  Exit codes:
0 success, 1 validation/runtime failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import sys

from . import experiment
from .config import load_config
from .errors import ConfigError, VrMimoError

_CONFIG_FLAGS = [
    ("--m", "m", "BS antennas M"),
    ("--k", "k", "number of users K"),
    ("--snr-db", "snr_db", "transmit SNR rho in dB"),
    ("--total-power", "total_power", "power budget P (linear)"),
    ("--trials", "trials", "Monte Carlo trials"),
    ("--seed", "seed", "master seed"),
    ("--normalization", "normalization", "trace-m | trace-d | both"),
    ("--d-grid", "d_grid", "region sizes: 2:60:2 or 2,4,6"),
    ("--estimators", "estimators", "comma list: monte-carlo,det-equiv,closed-form,link-level"),
    ("--out", "out", "output CSV path ('-' for stdout)"),
    ("--corr-r", "corr_r", "exponential antenna-correlation coefficient in [0,1)"),
    ("--n-symbols", "n_symbols", "link-level symbols per realization"),
    ("--ll-trials", "ll_trials", "realizations used by link-level rows"),
    ("--placement", "placement", "placement for `single`: stationary|worst|best|random"),
    ("--d", "d", "region size for `single`"),
    ("--eps-k", "eps_k", "error-study users"),
    ("--eps-m-grid", "eps_m_grid", "error-study M grid"),
    ("--eps-trials", "eps_trials", "error-study trials per grid point"),
]


def _add_config_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--config", metavar="FILE",
                        help="flat key = value config file")
    for flag, key, help_text in _CONFIG_FLAGS:
        parser.add_argument(flag, dest=key, metavar="VAL", help=help_text)


def _load(args: argparse.Namespace):
    overrides = {key: getattr(args, key) for _, key, _ in _CONFIG_FLAGS
                 if getattr(args, key) is not None}
    return load_config(args.config, overrides)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="vrmimo",
        description="Visibility-region massive MIMO downlink experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
            ("sweep-d", "sweep region size D for worst/best placements"),
            ("single", "evaluate one placement/normalization/D cell"),
            ("validate", "run the internal consistency suites"),
            ("epsilon-study", "fit the Gram-diagonal error decay in M")):
        _add_config_flags(sub.add_parser(name, help=help_text))
    args = parser.parse_args(argv)

    try:
        cfg = _load(args)
        if args.command == "sweep-d":
            rows = experiment.run_sweep_d(cfg)
            if cfg.out != "-":
                print(f"wrote {len(rows)} rows to {cfg.out}")
        elif args.command == "single":
            rows = experiment.run_single(cfg)
            if cfg.out != "-":
                print(f"wrote {len(rows)} rows to {cfg.out}")
        elif args.command == "validate":
            report = experiment.run_validate(cfg)
            print(report.format())
            return 0 if report.passed else 1
        else:  # epsilon-study
            study = experiment.run_epsilon_study(cfg)
            if cfg.out != "-":
                print(f"slope {study.slope:.4f} over M={list(study.M_grid)}; "
                      f"wrote {cfg.out}")
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except VrMimoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
