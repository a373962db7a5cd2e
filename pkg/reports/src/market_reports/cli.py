"""Command line for bundle figure rendering.

Exit codes: 0 all selected figures rendered, 2 bad arguments or malformed
input, 3 at least one selected figure was missing its CSV (the others are
still rendered and the gaps reported).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .render import FIGURES, MalformedCsvError, ReportSpec, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ces-reports",
        description="Render figures from a ces-market result bundle.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render", help="render selected figures")
    p.add_argument("--bundle", required=True, type=Path,
                   help="directory containing the CSV bundle")
    p.add_argument("--figs", default=",".join(FIGURES),
                   help=f"comma-separated selection from: {', '.join(FIGURES)}")
    p.add_argument("--format", choices=("vector", "raster"), default="vector")
    p.add_argument("--out", type=Path, default=Path("."),
                   help="output directory (never the bundle itself)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    figures = tuple(f.strip() for f in args.figs.split(",") if f.strip())
    spec = ReportSpec(
        bundle=args.bundle,
        figures=figures,
        out_format=args.format,
        out_dir=args.out,
    )
    try:
        report = render(spec)
    except (FileNotFoundError, ValueError, MalformedCsvError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(report.summary())
    return 0 if report.complete else 3


if __name__ == "__main__":
    sys.exit(main())
