"""Command-line front end.

Subcommands
-----------
steady     stationary operating point as JSON
spectrum   added-force noise PSD over a frequency range (CSV)
sweep      1D/2D parameter sweeps, bundled figure recipes (CSV/JSON)
stability  Routh-Hurwitz + eigenvalue stability report (JSON)
report     figure recipe rendered to PNG alongside its CSV

Exit codes: 0 ok, 1 usage/config error, 2 unstable, 3 marginal,
4 parametric threshold.  ``SQUEEZED_COM_THREADS`` caps sweep parallelism
(0 = auto).  All numeric output uses shortest round-trip representation.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from ._version import __version__
from .errors import ParametricThreshold, SqueezedComError
from .params import SystemParams, dump_config, load_config
from .spectrum import noise_spectrum
from .stability import is_stable
from .steadystate import solve_steady_state
from .sweep import (AXIS_NAMES, FIGURE_IDS, OBSERVABLES, Axis, SweepSpec,
                    csv_text, figure_dataset, json_text, run_sweep)

TWO_PI = 2.0 * math.pi

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_UNSTABLE = 2
EXIT_MARGINAL = 3
EXIT_THRESHOLD = 4

# axes whose CLI ranges are given in Hz and stored as angular frequencies
_HZ_AXIS = ("G", "delta", "omega")


class _Parser(argparse.ArgumentParser):
    """argparse with usage failures mapped onto exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _emit(text: str, out_path) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _fmt(value: float) -> str:
    return repr(float(value))


def _scalar_report(fields: dict, fmt: str) -> str:
    if fmt == "csv":
        header = ",".join(fields)
        row = ",".join(_fmt(v) if isinstance(v, float) else str(v)
                       for v in fields.values())
        return f"{header}\n{row}\n"
    return json.dumps(fields, indent=2) + "\n"


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, metavar="PATH",
                        help="JSON parameter file (Hz convention)")
    parser.add_argument("--out", metavar="PATH",
                        help="write output here instead of stdout")
    parser.add_argument("--format", choices=("csv", "json"),
                        help="output format (default: csv for tabular, "
                             "json for scalar reports)")
    parser.add_argument("--dump-config", action="store_true",
                        help="echo the normalized config as JSON and exit")
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="progress notes on stderr")


def _load_params(args) -> SystemParams:
    return load_config(args.config)


def _steady_fields(params: SystemParams) -> dict:
    ss = solve_steady_state(params)
    return {
        "alpha_re": ss.alpha.real,
        "alpha_im": ss.alpha.imag,
        "phi": ss.phi,
        "psi": ss.psi,
        "x_bar": ss.x_bar,
        "p_bar": ss.p_bar,
        "g_eff": ss.g_eff,
        "n_a": ss.n_a,
    }


def cmd_steady(args) -> int:
    params = _load_params(args)
    if args.dump_config:
        _emit(dump_config(params) + "\n", args.out)
        return EXIT_OK
    fields = _steady_fields(params)
    _emit(_scalar_report(fields, args.format or "json"), args.out)
    return EXIT_OK


def cmd_spectrum(args) -> int:
    params = _load_params(args)
    if args.dump_config:
        _emit(dump_config(params) + "\n", args.out)
        return EXIT_OK
    lo = args.omega_min_hz * TWO_PI
    hi = args.omega_max_hz * TWO_PI
    if args.points < 1:
        raise ValueError("--points must be >= 1")
    if args.log:
        if lo <= 0.0 or hi <= 0.0 or not lo < hi:
            raise ValueError("--log needs 0 < omega-min-hz < omega-max-hz")
        omegas = np.geomspace(lo, hi, args.points)
    else:
        if not lo < hi and args.points > 1:
            raise ValueError("need omega-min-hz < omega-max-hz")
        omegas = np.linspace(lo, hi, args.points)

    ss = solve_steady_state(params)
    points = [noise_spectrum(params, ss, float(w)) for w in omegas]
    columns = ("omega_hz", "s_thermal", "s_backaction", "s_shot", "s_ff",
               "s_sql", "ratio")
    if (args.format or "csv") == "json":
        rows = [{"omega_hz": p.omega / TWO_PI, "s_thermal": p.s_thermal,
                 "s_backaction": p.s_backaction, "s_shot": p.s_shot,
                 "s_ff": p.s_ff, "s_sql": p.s_sql, "ratio": p.ratio}
                for p in points]
        _emit(json.dumps(rows, indent=1) + "\n", args.out)
        return EXIT_OK
    lines = [",".join(columns)]
    for p in points:
        lines.append(",".join(_fmt(v) for v in (
            p.omega / TWO_PI, p.s_thermal, p.s_backaction, p.s_shot,
            p.s_ff, p.s_sql, p.ratio)))
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _parse_axis(text: str) -> Axis:
    parts = text.split(":")
    if len(parts) not in (4, 5):
        raise ValueError(f"axis spec {text!r} must be "
                         "name:lo:hi:points[:linear|log]")
    name = parts[0]
    if name not in AXIS_NAMES:
        raise ValueError(f"unknown axis {name!r}; expected one of {AXIS_NAMES}")
    lo, hi = float(parts[1]), float(parts[2])
    points = int(parts[3])
    spacing = parts[4] if len(parts) == 5 else "linear"
    if name in _HZ_AXIS:
        lo *= TWO_PI
        hi *= TWO_PI
    return Axis(name, lo, hi, points, spacing)


def cmd_sweep(args) -> int:
    params = _load_params(args)
    if args.dump_config:
        _emit(dump_config(params) + "\n", args.out)
        return EXIT_OK
    if args.figure:
        if args.verbose:
            print(f"running figure recipe {args.figure}", file=sys.stderr)
        result = figure_dataset(args.figure, baseline=params)
    else:
        if not args.axis1 or not args.observable:
            raise ValueError("custom sweeps need --axis1 and --observable "
                             "(or use --figure)")
        spec = SweepSpec(
            fixed=params,
            observable=args.observable,
            axis1=_parse_axis(args.axis1),
            axis2=_parse_axis(args.axis2) if args.axis2 else None,
            omega=args.omega_hz * TWO_PI,
        )
        if args.verbose:
            size = spec.axis1.points * (spec.axis2.points if spec.axis2 else 1)
            print(f"sweeping {size} grid points", file=sys.stderr)
        result = run_sweep(spec)
    text = json_text(result) + "\n" if (args.format == "json") else csv_text(result)
    _emit(text, args.out)
    return EXIT_OK


def cmd_stability(args) -> int:
    params = _load_params(args)
    if args.dump_config:
        _emit(dump_config(params) + "\n", args.out)
        return EXIT_OK
    report = is_stable(params, solve_steady_state(params))
    fields = {
        "c0": report.c0, "c1": report.c1, "c2": report.c2, "c3": report.c3,
        "rh1": report.rh1, "rh2": report.rh2, "rh3": report.rh3,
        "stable_rh": report.stable_rh, "stable_eig": report.stable_eig,
        "max_real_eig": report.max_real_eig, "marginal": report.marginal,
        "verdict": report.verdict,
    }
    _emit(_scalar_report(fields, args.format or "json"), args.out)
    if report.verdict == "marginal":
        return EXIT_MARGINAL
    return EXIT_OK if report.verdict == "stable" else EXIT_UNSTABLE


def cmd_report(args) -> int:
    from .report import render_figure_files

    params = _load_params(args)
    if args.dump_config:
        _emit(dump_config(params) + "\n", args.out)
        return EXIT_OK
    ids = FIGURE_IDS if args.figure == "all" else (args.figure,)
    for figure_id in ids:
        if args.verbose:
            print(f"rendering {figure_id}", file=sys.stderr)
        csv_path, png_path = render_figure_files(figure_id, args.out_dir,
                                                 baseline=params)
        sys.stdout.write(f"{csv_path}\n{png_path}\n")
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="squeezed-com",
                     description="OPA-assisted optomechanical force-sensor "
                                 "noise model")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("steady", help="stationary operating point")
    _add_common(p)
    p.set_defaults(func=cmd_steady)

    p = sub.add_parser("spectrum", help="added-force noise PSD vs frequency")
    _add_common(p)
    p.add_argument("--omega-min-hz", type=float, required=True)
    p.add_argument("--omega-max-hz", type=float, required=True)
    p.add_argument("--points", type=int, default=200, metavar="N")
    p.add_argument("--log", action="store_true",
                   help="log-spaced frequency grid")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("sweep", help="parameter sweeps and figure datasets")
    _add_common(p)
    p.add_argument("--figure", choices=FIGURE_IDS,
                   help="run a bundled figure recipe")
    p.add_argument("--axis1", metavar="NAME:LO:HI:N[:SPACING]",
                   help="first sweep axis (frequencies in Hz)")
    p.add_argument("--axis2", metavar="NAME:LO:HI:N[:SPACING]")
    p.add_argument("--observable", choices=OBSERVABLES)
    p.add_argument("--omega-hz", type=float, default=1e5,
                   help="analysis frequency when omega is not an axis")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("stability", help="stability report "
                                         "(exit 0 stable, 2 unstable, 3 marginal)")
    _add_common(p)
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("report", help="render figure recipes to PNG + CSV")
    _add_common(p)
    p.add_argument("--figure", default="all",
                   choices=FIGURE_IDS + ("all",))
    p.add_argument("--out-dir", default=".", metavar="DIR")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits; surface as a return code
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ParametricThreshold as exc:
        print(f"squeezed-com: parametric threshold: {exc}", file=sys.stderr)
        return EXIT_THRESHOLD
    except (ValueError, OSError, SqueezedComError) as exc:
        print(f"squeezed-com: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
