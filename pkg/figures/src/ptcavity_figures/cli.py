"""Command line: render one reproduction figure from its CSV."""

import argparse
import sys
from pathlib import Path

from .render import FIGURES, EmptyDataError, SchemaError, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ptcavity-figures", description="Render reproduction figures from CSV tables."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render", help="render one figure")
    p.add_argument("figure", choices=sorted(FIGURES))
    p.add_argument("csv", type=Path)
    p.add_argument("out", type=Path, help="output image (.png or .svg)")
    args = parser.parse_args(argv)

    try:
        render(args.figure, args.csv, args.out)
    except (SchemaError, EmptyDataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
