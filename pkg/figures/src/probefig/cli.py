"""probefig: render isingprobe run outputs into figures.

    probefig --kind contour --input run/surface.csv --value qfi \
             --output fig3.png

Exit codes: 0 success, 2 bad arguments or schema mismatch.
"""

import argparse
import sys

from .render import KINDS, FigureSpec, SchemaMismatch, StaleInput, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="probefig", description=__doc__)
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--input", action="append", required=True,
                        help="input CSV/JSON (repeatable for scaling overlays)")
    parser.add_argument("--output", required=True, help="image path (.png or .svg)")
    parser.add_argument("--value", default="L",
                        help="surface column to plot: L or qfi (default L)")
    parser.add_argument("--label", action="append", default=[],
                        help="legend label per input (scaling kind)")
    parser.add_argument("--title", default="")
    parser.add_argument("--xlabel", default="")
    parser.add_argument("--ylabel", default="")
    parser.add_argument("--levels", type=int, default=24)
    parser.add_argument("--cmap", default="viridis")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = FigureSpec(inputs=args.input, kind=args.kind, output=args.output,
                      value=args.value, title=args.title, xlabel=args.xlabel,
                      ylabel=args.ylabel, labels=args.label,
                      levels=args.levels, cmap=args.cmap)
    try:
        path = render(spec)
    except (SchemaMismatch, StaleInput, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
