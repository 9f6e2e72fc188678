"""Command line entry point: ``magbeam {solve,sweep,maxpower,geometry,validate}``.

Exit codes: 0 success (optimum found), 2 the requested load power is
infeasible, 1 any other error.  The log level is read from the
``MAGBEAM_LOG_LEVEL`` environment variable (default ``WARNING``).
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import harness
from .errors import MagbeamError, ParseError, SchemaError
from .geometry import (DEFAULT_SEGMENTS, Loop, inductance_matrices, mutual_inductance_coaxial,
                       mutual_inductance_neumann)
from .scenario import MODES, bundled_path, load_scenario

LOG_ENV = "MAGBEAM_LOG_LEVEL"


def _scenario_path(arg: str) -> Path:
    """Accept a file path, or the bare name of a bundled scenario."""
    p = Path(arg)
    if p.exists():
        return p
    bundled = bundled_path(arg if arg.endswith(".json") else arg + ".json")
    if bundled.exists():
        return bundled
    raise MagbeamError(f"scenario file not found: {arg}")


def _write(text: str, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_solve(args) -> int:
    sc = load_scenario(_scenario_path(args.scenario))
    text, report, code = harness.run_solve(sc, args.mode, args.beta0, args.tol, args.seed,
                                           args.timing)
    if args.json:
        _write(harness.to_json(report), args.out)
    else:
        sys.stdout.write(text)
        if args.out:
            Path(args.out).write_text(harness.to_json(report))
    return code


def cmd_sweep(args) -> int:
    sc = load_scenario(_scenario_path(args.scenario))
    modes = None
    if args.mode:
        modes = MODES if args.mode == "all" else tuple(args.mode.split(","))
        bad = [m for m in modes if m not in MODES]
        if bad:
            raise MagbeamError(f"unknown mode(s): {', '.join(bad)}")
    csv_text = harness.run_sweep(sc, modes, args.tol, args.seed, args.timing, args.jobs)
    _write(csv_text, args.out)
    return harness.EXIT_OK


def cmd_maxpower(args) -> int:
    sc = load_scenario(_scenario_path(args.scenario))
    text, report, code = harness.run_maxpower(sc, args.tol)
    if args.json:
        _write(harness.to_json(report), args.out)
    else:
        sys.stdout.write(text)
        if args.out:
            Path(args.out).write_text(harness.to_json(report))
    return code


def cmd_geometry(args) -> int:
    if args.coaxial:
        r1, r2, d = args.coaxial
        exact = mutual_inductance_coaxial(r1, r2, d)
        a = Loop((0.0, 0.0, 0.0), (0.0, 0.0, 1.0), r1, 1, min(r1, r2) * 1e-3)
        b = Loop((0.0, 0.0, d), (0.0, 0.0, 1.0), r2, 1, min(r1, r2) * 1e-3)
        quad, err = mutual_inductance_neumann(a, b, args.segments, with_error=True)
        _write(f"coaxial (Maxwell)   {exact:.12e} H\n"
               f"Neumann quadrature  {quad:.12e} H  (error estimate {err:.1e})\n"
               f"relative difference {abs(quad - exact) / abs(exact):.3e}\n", args.out)
        return harness.EXIT_OK
    if not args.scenario:
        raise MagbeamError("give a scenario with a geometry block, or --coaxial R1 R2 D")
    sc = load_scenario(_scenario_path(args.scenario))
    if sc.geometry is None:
        raise MagbeamError("scenario has explicit inductances and no geometry block")
    m, m_tx, l_tx, l_rx = inductance_matrices(sc.geometry.transmitters, sc.geometry.receiver,
                                              args.segments or sc.geometry.segments)
    with np.printoptions(precision=6, linewidth=120):
        _write(f"m (H):\n{m}\nm_tx (H):\n{m_tx}\n"
               f"self inductance TX (H): {l_tx}\nself inductance RX (H): {l_rx:.6e}\n", args.out)
    return harness.EXIT_OK


def cmd_validate(args) -> int:
    sc = load_scenario(_scenario_path(args.scenario))
    src = "geometry" if sc.geometry is not None else "explicit inductances"
    sys.stdout.write(f"ok: {sc.name} (N = {sc.n}, {src})\n")
    return harness.EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="magbeam", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, mode=True):
        p.add_argument("scenario", help="scenario JSON file or bundled scenario name")
        p.add_argument("--tol", type=float, help="SDP duality-gap tolerance")
        p.add_argument("--seed", type=int, help="oracle seed")
        p.add_argument("--out", help="write output here instead of stdout")
        if mode:
            p.add_argument("--mode", help="solver mode: " + ", ".join(MODES + ("all",)))
        p.add_argument("--timing", action="store_true",
                       help="record wall time (makes output non-reproducible)")

    p = sub.add_parser("solve", help="solve one load-power target")
    common(p)
    p.add_argument("--beta0", type=float, help="required load power in W")
    p.add_argument("--json", action="store_true", help="emit the JSON report")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="sweep beta0 and write CSV")
    common(p)
    p.add_argument("--jobs", type=int, default=1, help="worker threads")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("maxpower", help="largest deliverable load power")
    p.add_argument("scenario")
    p.add_argument("--tol", type=float)
    p.add_argument("--out")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_maxpower)

    p = sub.add_parser("geometry", help="inductances from loop geometry")
    p.add_argument("scenario", nargs="?")
    p.add_argument("--coaxial", type=float, nargs=3, metavar=("R1", "R2", "D"))
    p.add_argument("--segments", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_geometry)

    p = sub.add_parser("validate", help="check a scenario file against the schema")
    p.add_argument("scenario")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get(LOG_ENV, "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    if args.command == "geometry" and args.segments is None and args.coaxial:
        args.segments = DEFAULT_SEGMENTS
    if args.command == "solve" and args.mode and args.mode not in MODES + ("all",):
        print(f"error: unknown mode {args.mode!r}", file=sys.stderr)
        return harness.EXIT_ERROR
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc} (line {exc.line}, column {exc.column})", file=sys.stderr)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
    except (MagbeamError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return harness.EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
