"""Command-line front end: ``entransfer <experiment> [options]``.

Exit codes: 0 success, 2 configuration or truncation error, 3 convergence failure.
"""

from __future__ import annotations

import argparse
import os
import sys

from ..errors import ConfigError, ConvergenceError, TruncationError
from .config import EXPERIMENTS, default_config, load_config, parse_n_max, parse_number
from .runners import (
    BOUNDARY_COLUMNS,
    CONVERGENCE_COLUMNS,
    CURVE_COLUMNS,
    FIG3_COLUMNS,
    FIG5_COLUMNS,
    PREPARE_COLUMNS,
    run_experiment,
)

EXIT_OK, EXIT_CONFIG, EXIT_CONVERGENCE = 0, 2, 3

_COLUMNS = {
    "prepare": PREPARE_COLUMNS,
    "fig2": CURVE_COLUMNS,
    "fig3": FIG3_COLUMNS,
    "fig4": CURVE_COLUMNS,
    "fig5": FIG5_COLUMNS,
    "sweep": CURVE_COLUMNS,
    "boundary": BOUNDARY_COLUMNS,
    "convergence": CONVERGENCE_COLUMNS,
}

_SUMMARY = {
    "prepare": "photon statistics of the prepared two-cavity state",
    "fig2": "first-pair negativity versus interaction time, peaks flagged",
    "fig3": "trajectories in the (linear entropy, negativity) plane",
    "fig4": "uncertainty function of the residual cavity field",
    "fig5": "second-pair negativity maximized over its interaction time",
    "sweep": "generic grid over r and tau1",
    "boundary": "frontier families of maximal negativity at given mixedness",
    "convergence": "smallest Fock cutoff at which results stop changing",
}

_EPILOG = """\
Output is CSV with a '#'-prefixed metadata block (tool version, resolved
config, n_max and truncation weight per r) followed by one row per grid
point; --format json carries the same metadata, columns and rows.
Quantities that were not computed are written as null.
"""


def _grid(text):
    parts = [p for p in text.split(",") if p.strip()]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("a grid is 'start,stop,step'")
    return tuple(parse_number(p) for p in parts)


def _number_list(text):
    return tuple(parse_number(p) for p in text.split(",") if p.strip())


def _number(text):
    return parse_number(text)


def build_parser() -> argparse.ArgumentParser:
    # argparse exits with 2 on usage errors, matching the config-error code
    parser = argparse.ArgumentParser(prog="entransfer", description="Entanglement transfer experiments.", epilog=_EPILOG,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="experiment", required=True, metavar="EXPERIMENT")
    for name in EXPERIMENTS:
        cols = ", ".join(_COLUMNS[name])
        p = sub.add_parser(
            name,
            help=_SUMMARY[name],
            description=f"{_SUMMARY[name]}.\n\ncolumns: {cols}\n\n{_EPILOG}",
            formatter_class=argparse.RawDescriptionHelpFormatter,
        )
        p.add_argument("--config", metavar="PATH", help="INI file; the [%s] section is used" % name)
        p.add_argument("--out", metavar="PATH", help="output file ('-' for stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--jobs", type=int, default=1, metavar="N", help="worker processes")
        p.add_argument("--n-max", metavar="{auto,INT}", help="Fock cutoff per mode")
        p.add_argument("--r", type=_number_list, metavar="R[,R...]", help="squeezing values")
        p.add_argument("--sin2-theta", type=_number, metavar="X", help="beam-splitter transfer fraction")
        p.add_argument("--tau1", type=_grid, metavar="START,STOP,STEP", help="first-pair time grid")
        p.add_argument("--tau2", type=_grid, metavar="START,STOP,STEP", help="second-pair time grid")
        p.add_argument("--kappa-tbar", type=_number, metavar="X", help="cavity decay between pairs")
        p.add_argument("--delta-tau", type=_number, metavar="X", help="delay of qubit 2")
    return parser


def resolve_config(args):
    cfg = load_config(args.config, args.experiment) if args.config else default_config(args.experiment)
    over = dict(
        r_values=args.r,
        sin2_theta=args.sin2_theta,
        tau1_grid=args.tau1,
        tau2_grid=args.tau2,
        kappa_tbar=args.kappa_tbar,
        delta_tau=args.delta_tau,
        output_path=args.out,
    )
    if args.n_max is not None:
        over["n_max"] = parse_n_max(args.n_max, "--n-max")
    return cfg.with_overrides(**over)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.jobs < 1:
        print("entransfer: config error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = resolve_config(args)
        result = run_experiment(cfg, jobs=args.jobs)
        result.write(cfg.output_path, args.format)
    except (ConfigError, TruncationError) as exc:
        print(f"entransfer: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as exc:
        print(f"entransfer: convergence failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except BrokenPipeError:
        # downstream closed early (e.g. piped into head)
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
