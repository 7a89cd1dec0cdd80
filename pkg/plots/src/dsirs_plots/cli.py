"""Command-line wrapper: read a sweep directory, write the two figures."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import PlotsError
from .figures import render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="dsirs-plots",
        description="Render mean-ratio and mean-difference figures from sweep CSVs.",
    )
    parser.add_argument("--in", dest="in_dir", required=True,
                        help="directory holding aggregates.csv (and results.csv)")
    parser.add_argument("--out", dest="out_dir", required=True,
                        help="directory for the rendered figures")
    parser.add_argument("--format", choices=("png", "svg"), default="png")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        written = render(Path(args.in_dir) / "aggregates.csv", args.out_dir,
                         fmt=args.format)
    except (PlotsError, OSError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
