"""Command-line interface.

Subcommands:

    varwave run <config>                      execute a run
    varwave snapshot <run-dir> --tau <t>      print/emit a snapshot CSV
    varwave chars <run-dir> --from <x> --sign <+|->   trace a characteristic
    varwave converge <config> --levels <n>    self-convergence study
    varwave energy <run-dir>                  print the energy report
    varwave qbound <run-dir>                  print the interaction bound

Exit codes: 0 success, 2 validation failure, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .errors import NumericalError, ValidationError
from .config import load_config


def _cmd_run(args) -> int:
    from .runner import run

    cfg = load_config(args.config)
    if args.out:
        cfg.out_dir = args.out
    if args.oracle:
        cfg.oracle = args.oracle
        cfg.validate()
    manifest = run(cfg)
    print(f"run complete: {len(manifest['artifacts'])} artifacts "
          f"in {cfg.out_dir}")
    for w in manifest["warnings"]:
        print(f"warning: {w}", file=sys.stderr)
    return 0


def _cmd_snapshot(args) -> int:
    from .runner import load_grid, _write_csv

    grid = load_grid(os.path.join(args.run_dir, "grid.npz"))
    if not (0.0 <= args.tau <= grid.t_max):
        raise ValidationError(
            f"tau={args.tau} outside [0, t_max={grid.t_max}]")
    from .reconstruct import snapshot

    snap = snapshot(grid, args.tau)
    out = args.out or "-"
    cols = [snap.x, snap.u,
            np.where(snap.defined, snap.u_t, np.nan),
            np.where(snap.defined, snap.u_x, np.nan),
            np.where(snap.defined, snap.R, np.nan),
            np.where(snap.defined, snap.S, np.nan),
            snap.defined.astype(float)]
    if out == "-":
        sys.stdout.write("x,u,u_t,u_x,R,S,defined\n")
        for row in zip(*cols):
            sys.stdout.write(",".join("%.17g" % v for v in row) + "\n")
    else:
        _write_csv(out, "x,u,u_t,u_x,R,S,defined", cols)
        print(f"wrote {out}")
    print(f"# tau={args.tau} e_minus={snap.e_minus:.17g} "
          f"e_plus={snap.e_plus:.17g} e_total={snap.e_total:.17g} "
          f"atoms={len(snap.atoms)}", file=sys.stderr)
    return 0


def _cmd_chars(args) -> int:
    from .runner import load_grid, _write_csv
    from .characteristics import trace_from_grid

    grid = load_grid(os.path.join(args.run_dir, "grid.npz"))
    sign = {"+": "forward", "-": "backward"}[args.sign]
    curve = trace_from_grid(grid, args.x_start, sign=sign)
    if args.out:
        _write_csv(args.out, f"t,x,label={curve.label}", [curve.t, curve.x])
        print(f"wrote {args.out}")
    else:
        sys.stdout.write("t,x\n")
        for t, x in zip(curve.t, curve.x):
            sys.stdout.write("%.17g,%.17g\n" % (t, x))
    return 0


def _cmd_converge(args) -> int:
    from .runner import convergence_study

    cfg = load_config(args.config)
    if args.out:
        cfg.out_dir = args.out
    report = convergence_study(cfg, args.levels)
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0


def _cmd_energy(args) -> int:
    path = os.path.join(args.run_dir, "energy.json")
    if not os.path.exists(path):
        raise ValidationError(f"no energy report in {args.run_dir}")
    with open(path, encoding="utf-8") as fh:
        sys.stdout.write(fh.read())
    return 0


def _cmd_qbound(args) -> int:
    path = os.path.join(args.run_dir, "qbound.json")
    if not os.path.exists(path):
        raise ValidationError(f"no interaction bound report in {args.run_dir}")
    with open(path, encoding="utf-8") as fh:
        report = json.load(fh)
    sys.stdout.write(json.dumps(report, indent=2, sort_keys=True) + "\n")
    return 0 if report.get("passed") else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="varwave",
        description="Conservative variational wave equation solver")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="execute a run from a config file")
    p.add_argument("config")
    p.add_argument("--out", help="override output.dir")
    p.add_argument("--oracle", choices=["none", "dalembert", "fd"],
                   help="override oracle.name")
    p.set_defaults(fn=_cmd_run)

    p = sub.add_parser("snapshot", help="reconstruct a snapshot at time tau")
    p.add_argument("run_dir")
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.set_defaults(fn=_cmd_snapshot)

    p = sub.add_parser("chars", help="trace a characteristic curve")
    p.add_argument("run_dir")
    p.add_argument("--from", dest="x_start", type=float, required=True)
    p.add_argument("--sign", choices=["+", "-"], required=True)
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.set_defaults(fn=_cmd_chars)

    p = sub.add_parser("converge", help="self-convergence study")
    p.add_argument("config")
    p.add_argument("--levels", type=int, default=3)
    p.add_argument("--out", help="override output.dir")
    p.set_defaults(fn=_cmd_converge)

    p = sub.add_parser("energy", help="print the energy report of a run")
    p.add_argument("run_dir")
    p.set_defaults(fn=_cmd_energy)

    p = sub.add_parser("qbound", help="print the interaction bound report")
    p.add_argument("run_dir")
    p.set_defaults(fn=_cmd_qbound)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
