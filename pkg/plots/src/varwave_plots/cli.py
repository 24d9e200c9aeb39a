"""CLI: plots render <run-dir> --kinds snapshot,chars,energy,q,converge"""

from __future__ import annotations

import argparse
import sys

from .render import KINDS, PlotError, render


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="plots", description="Render figures from a run directory")
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render")
    p.add_argument("run_dir")
    p.add_argument("--kinds", default=",".join(KINDS),
                   help="comma-separated subset of: " + ",".join(KINDS))
    args = ap.parse_args(argv)
    kinds = [k.strip() for k in args.kinds.split(",") if k.strip()]
    try:
        files, notices = render(args.run_dir, kinds)
    except PlotError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for n in notices:
        print(f"notice: {n}")
    for f in files:
        print(f"wrote {f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
