"""plotgen <csv> --x <col> [--y xq] [--series label] [--kind line|heatmap] -o out.png"""
from __future__ import annotations

import argparse
import sys

from .render import PlotError, PlotSpec, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plotgen", description=__doc__)
    parser.add_argument("csv", help="experiment CSV to plot")
    parser.add_argument("--x", required=True, help="x-axis column")
    parser.add_argument("--y", default="xq", help="value column (default: xq)")
    parser.add_argument("--series", default="label",
                        help="series column for lines / second axis for heatmaps")
    parser.add_argument("--kind", choices=("line", "heatmap"), default="line")
    parser.add_argument("-o", "--out", required=True, help="output PNG path")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = PlotSpec(
            csv_path=args.csv,
            x_column=args.x,
            y_column=args.y,
            series_column=args.series,
            kind=args.kind,
            out_path=args.out,
        )
        out = render(spec)
    except PlotError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
