"""CLI: ddmod-figures render --in <csv dir> --out <image dir>."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .render import DEFAULT_BITS_PER_FRAME, SchemaError, render_figures


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ddmod-figures",
                                     description="render figures from simulation CSVs")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render", help="render one PNG per experiment CSV")
    p.add_argument("--in", dest="csv_dir", type=Path, required=True,
                   help="directory holding result CSVs")
    p.add_argument("--out", dest="out_dir", type=Path, required=True,
                   help="directory for PNG output")
    p.add_argument("--bits-per-frame", type=int, default=DEFAULT_BITS_PER_FRAME,
                   help="bits per Monte-Carlo frame, sets the zero-BER floor")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        images = render_figures(args.csv_dir, args.out_dir, args.bits_per_frame)
    except (SchemaError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for path in images:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
