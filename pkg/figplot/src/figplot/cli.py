"""Command line: figplot <csv> --figure <tag> --out <file>."""
from __future__ import annotations

import argparse
import sys

from .render import FIGURE_SPECS, EmptySelectionError, SchemaError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="figplot",
        description="Render an experiment-harness CSV into a figure image.")
    parser.add_argument("csv", help="harness CSV file")
    parser.add_argument("--figure", required=True, choices=sorted(FIGURE_SPECS),
                        help="figure tag to draw")
    parser.add_argument("--out", required=True, help="output image (.png or .svg)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        report = render(args.csv, args.figure, args.out)
    except (SchemaError, EmptySelectionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    print(f"{report.out_path} ({report.n_series} series, {report.n_rows} rows)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
