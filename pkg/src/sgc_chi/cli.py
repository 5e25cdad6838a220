"""Command-line entry point: ``sgc-chi {sweep,steady,chi,verify}``.

Exit codes: 0 success, 1 invalid input, 2 computation error (singular
formula, non-unique steady state, failed integration or fit), 3 I/O error.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .core import SystemParams, require_valid
from .errors import (
    ConfigError,
    DomainError,
    ExtractionUnreliable,
    IntegrationError,
    InvalidParameters,
    NonUniqueSteadyState,
    SingularityError,
)
from .liouvillian import steady_state
from .susceptibility import chi1, chi2
from .sweep import DeltaGrid, SweepConfig, run_sweep, write_output

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_COMPUTE = 2
EXIT_IO = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_params(parser, with_probe=True, with_delta=True):
    parser.add_argument("--gamma2", type=float, default=1.0)
    parser.add_argument("--gamma3", type=float, default=1.0)
    parser.add_argument("--p", type=float, default=0.0, help="dipole alignment cos(theta)")
    parser.add_argument("--omega-c0", type=float, default=4.0)
    if with_probe:
        parser.add_argument("--omega-p0", type=float, default=0.1)
    if with_delta:
        parser.add_argument("--delta", type=float, default=0.0, help="probe detuning")


def _params_from(args) -> SystemParams:
    return require_valid(SystemParams(
        gamma2=args.gamma2,
        gamma3=args.gamma3,
        p=args.p,
        omega_c0=args.omega_c0,
        omega_p0=getattr(args, "omega_p0", 0.1),
        delta_p=args.delta,
    ))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sgc-chi", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    sw = sub.add_parser("sweep", help="tabulate chi1 and chi2 over a detuning grid")
    sw.add_argument("--config", help="JSON file with SweepConfig fields")
    sw.add_argument("--gamma2", type=float)
    sw.add_argument("--gamma3", type=float)
    sw.add_argument("--omega-c0", type=float)
    sw.add_argument("--omega-p0", type=float)
    sw.add_argument("--p", type=float, nargs="+", help="one or more alignment values")
    sw.add_argument("--delta-min", type=float)
    sw.add_argument("--delta-max", type=float)
    sw.add_argument("--points", type=int)
    sw.add_argument("--mode", choices=("analytic", "full"))
    sw.add_argument("--out", help="output file, '-' for stdout")
    sw.add_argument("--format", choices=("csv", "json"))

    st = sub.add_parser("steady", help="print the 3x3 steady state")
    _add_params(st)

    ch = sub.add_parser("chi", help="print chi1 and chi2 at one detuning")
    _add_params(ch, with_probe=False)

    sub.add_parser("verify", help="run the invariant and oracle checks")
    return parser


def _sweep_config(args) -> SweepConfig:
    config = SweepConfig.load(args.config) if args.config else SweepConfig()
    base_changes = {k: v for k, v in (("gamma2", args.gamma2), ("gamma3", args.gamma3),
                                       ("omega_c0", args.omega_c0), ("omega_p0", args.omega_p0))
                    if v is not None}
    grid = config.delta_grid
    grid = DeltaGrid(
        min=grid.min if args.delta_min is None else args.delta_min,
        max=grid.max if args.delta_max is None else args.delta_max,
        count=grid.count if args.points is None else args.points,
    )
    changes = {"base": replace(config.base, **base_changes), "delta_grid": grid}
    if args.p is not None:
        changes["p_values"] = tuple(args.p)
    if args.mode is not None:
        changes["mode"] = args.mode
    if args.out is not None:
        changes["output_path"] = args.out
    if args.format is not None:
        changes["format"] = args.format
    return replace(config, **changes)


def _fmt_complex(z: complex) -> str:
    # adding 0.0 turns -0.0 into 0.0
    return f"{z.real + 0.0:.17g}{z.imag + 0.0:+.17g}j"


def _cmd_sweep(args) -> int:
    config = _sweep_config(args)
    table = run_sweep(config)
    path = write_output(table, config)
    if path is not None:
        print(f"wrote {len(table)} rows to {path}", file=sys.stderr)
    return EXIT_OK


def _cmd_steady(args) -> int:
    rho = steady_state(_params_from(args)).rho
    for row in rho:
        print("  ".join(_fmt_complex(z) for z in row))
    return EXIT_OK


def _cmd_chi(args) -> int:
    params = _params_from(args)
    print(f"omega_c_eff = {params.omega_c:.17g}")
    print(f"chi1 = {_fmt_complex(chi1(params))}")
    print(f"chi2 = {_fmt_complex(chi2(params))}")
    return EXIT_OK


def _cmd_verify(args) -> int:
    from .verify import run_all

    results = run_all()
    for r in results:
        flag = "PASS" if r.passed else "FAIL"
        detail = f"  ({r.detail})" if r.detail else ""
        print(f"{flag}  [{r.suite}] {r.name}{detail}")
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_COMPUTE


COMMANDS = {"sweep": _cmd_sweep, "steady": _cmd_steady, "chi": _cmd_chi, "verify": _cmd_verify}


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except (UsageError, InvalidParameters, ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (SingularityError, NonUniqueSteadyState, IntegrationError, ExtractionUnreliable) as exc:
        print(f"computation error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
