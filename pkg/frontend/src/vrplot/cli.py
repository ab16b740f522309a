"""Command line front door: ``vrplot render --in sweep.csv --out fig.png``."""

import argparse
import sys
from pathlib import Path

from .errors import VrPlotError
from .figure import PlotSpec, render


def build_parser():
    parser = argparse.ArgumentParser(
        prog="vrplot",
        description="Render sweep result CSVs into SINR-vs-D figures.")
    sub = parser.add_subparsers(dest="command", required=True)
    rend = sub.add_parser(
        "render", help="draw one panel per normalization present in the CSV")
    rend.add_argument("--in", dest="csv_path", required=True, metavar="CSV",
                      help="sweep results file produced by the simulator")
    rend.add_argument("--out", dest="out_path", required=True, metavar="IMAGE",
                      help="output image path (format from extension)")
    rend.add_argument("--normalization", choices=("trace-m", "trace-d"),
                      default=None, help="restrict the figure to one panel")
    rend.add_argument("--estimators", default=None, metavar="LIST",
                      help="comma-separated subset, "
                           "e.g. monte-carlo,closed-form")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    estimators = None
    if args.estimators is not None:
        estimators = tuple(s.strip() for s in args.estimators.split(",")
                           if s.strip())
    spec = PlotSpec(csv_path=Path(args.csv_path),
                    out_path=Path(args.out_path),
                    normalization=args.normalization,
                    estimators=estimators)
    try:
        result = render(spec)
    except (OSError, VrPlotError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    counts = ", ".join(f"{n}: {result.families[n]} families"
                       for n in result.panels)
    print(f"wrote {result.out_path} ({counts})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
