"""Command line: tsb-figures render --kind <kind> --in <csv...> --out <img>.

Exit codes: 0 on success, 2 on a schema mismatch (with a column-level
message on stderr), 1 on anything else.
"""

from __future__ import annotations

import argparse
import sys

from .reader import SchemaError
from .render import KINDS, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tsb-figures")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render", help="render one figure from experiment CSV logs")
    p.add_argument("--kind", required=True, choices=KINDS)
    p.add_argument("--in", dest="inputs", required=True, nargs="+", help="input CSV file(s)")
    p.add_argument("--out", required=True, help="output image path (.png, .pdf, .svg)")
    p.add_argument("--linear-y", action="store_true", help="linear instead of log y axis")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        out = render(args.kind, args.inputs, args.out, log_y=not args.linear_y)
    except SchemaError as err:
        print(f"schema error: {err}", file=sys.stderr)
        return 2
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
