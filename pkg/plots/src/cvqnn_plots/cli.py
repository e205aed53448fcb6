"""Command-line figure rendering for simulator run directories."""

from __future__ import annotations

import argparse
import sys

from .render import KINDS, FigureSpec, RenderError, render, render_run


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="cvqnn-plots", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    one = sub.add_parser("render", help="render a single figure from CSV inputs")
    one.add_argument("--kind", required=True, choices=KINDS)
    one.add_argument("--input", action="append", default=[], help="input CSV (repeatable)")
    one.add_argument("--metrics", default=None, help="metrics JSON for annotations")
    one.add_argument("--output", required=True)
    one.add_argument("--title", default=None)

    auto = sub.add_parser("run", help="render every recognized artifact of a run directory")
    auto.add_argument("run_dir")
    auto.add_argument("--out", default=None)

    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0

    try:
        if args.command == "render":
            spec = FigureSpec(
                kind=args.kind,
                inputs=tuple(args.input),
                output=args.output,
                metrics=args.metrics,
                title=args.title,
            )
            written = [render(spec)]
        else:
            written = render_run(args.run_dir, args.out)
    except RenderError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
