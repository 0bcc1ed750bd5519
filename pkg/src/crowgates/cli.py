"""Command-line entry point: ``crowgates run | estimate | list-experiments``."""
from __future__ import annotations

import argparse
import json
import sys

from .experiments import EXIT_CONFIG, EXIT_OK, describe_experiments, jsonable, run_experiment
from .feasibility import DeviceParams, omega_from_wavelength, params_estimate


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crowgates",
        description="Doped coupled-cavity waveguide gate experiments.",
        epilog="CSV outputs per experiment:\n" + describe_experiments(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment from a JSON config",
                         epilog=describe_experiments(), formatter_class=argparse.RawDescriptionHelpFormatter)
    run.add_argument("--config", required=True, help="JSON config file")
    run.add_argument("--out", help="output directory (overrides output_dir in the config)")
    run.add_argument("--threads", type=int, default=1, help="worker threads for sweeps (1 = bit-reproducible)")
    run.add_argument("--allow-nonperturbative", action="store_true",
                     help="run even when |delta| < 10 max(g1, g2); the report is marked")

    d = DeviceParams()
    est = sub.add_parser("estimate", help="SI feasibility estimate")
    est.add_argument("--q", type=float, default=d.Q, help="quality factor")
    est.add_argument("--omega", type=float, default=None, help="carrier angular frequency [rad/s]")
    est.add_argument("--wavelength", type=float, default=852e-9, help="carrier wavelength [m] if --omega unset")
    est.add_argument("--g", type=float, default=d.g, help="single-dopant coupling [rad/s]")
    est.add_argument("--n", type=int, default=d.N, help="dopant count")
    est.add_argument("--delta", type=float, default=d.Delta, help="detuning [rad/s]")
    est.add_argument("--vg", type=float, default=d.v_g, help="group velocity as a fraction of c")
    est.add_argument("--length", type=float, default=d.length, help="device length [lattice constants]")
    est.add_argument("--lattice-constant", type=float, default=d.lattice_constant, help="[m]")
    est.add_argument("--g1", type=float, default=None, help="lower-transition coupling [rad/s], default g")
    est.add_argument("--g2", type=float, default=None, help="upper-transition coupling [rad/s], default g")

    sub.add_parser("list-experiments", help="list experiments and their CSV columns")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list-experiments":
        print(describe_experiments())
        return EXIT_OK
    if args.command == "estimate":
        omega = args.omega if args.omega is not None else omega_from_wavelength(args.wavelength)
        try:
            device = DeviceParams(Q=args.q, omega=omega, g=args.g, N=args.n, Delta=args.delta, v_g=args.vg,
                                  length=args.length, lattice_constant=args.lattice_constant, g1=args.g1, g2=args.g2)
        except ValueError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        print(json.dumps(jsonable(params_estimate(device)), indent=2, sort_keys=True))
        return EXIT_OK
    return run_experiment(args.config, args.out, threads=args.threads,
                          allow_nonperturbative=args.allow_nonperturbative, stderr=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
