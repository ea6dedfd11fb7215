"""Command-line front end: ``scatter-channels <command> [--scenario FILE] ...``.

Exit codes: 0 success, 2 scenario validation, 3 computation, 4 I/O.
"""

from __future__ import annotations

import argparse
import contextlib
import os
import sys

from .errors import ScatteringError
from .io import write_outputs
from .reports import COMMANDS
from .scenario import ScenarioError, load

EXIT_OK, EXIT_VALIDATION, EXIT_COMPUTATION, EXIT_IO = 0, 2, 3, 4


def build_parser():
    # argparse exits with 2 on bad usage, which is also the validation code
    parser = argparse.ArgumentParser(prog="scatter-channels", description="Transmission/reflection channel split of 1D scattering")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("amplitudes", "energy sweep of r, t and channel amplitudes"),
        ("decompose", "stationary channel decomposition on an x grid"),
        ("evolve", "channel packets: snapshots, norm/overlap series, grid-oracle check"),
        ("times", "dwell, Larmor and group-delay times"),
        ("bohm", "Bohmian ensemble and critical starting point"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--scenario", help="scenario JSON file (default: reference scenario)")
        p.add_argument("--out", help="output directory (overrides the scenario)")
        p.add_argument("--no-banner", action="store_true", help="omit the timestamp comment line")
        p.add_argument("--threads", type=int, default=0, help="BLAS threads, 0 = library default")
    return parser


def _thread_limit(n):
    if n and n > 0:
        from threadpoolctl import threadpool_limits

        return threadpool_limits(limits=n)
    return contextlib.nullcontext()


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.threads < 0:
        print("error: --threads must be >= 0", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        scenario = load(args.scenario)
    except ScenarioError as exc:
        print(f"invalid scenario {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"cannot read scenario: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        with _thread_limit(args.threads):
            files = COMMANDS[args.command](scenario, banner=not args.no_banner)
    except ScatteringError as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        return EXIT_COMPUTATION
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        paths = write_outputs(scenario.output_dir(args.out), files)
    except OSError as exc:
        print(f"cannot write outputs: {exc}", file=sys.stderr)
        return EXIT_IO
    for path in paths:
        print(os.fspath(path))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
