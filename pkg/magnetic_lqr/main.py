"""
Magnetic LQR - Command Line Entry Point

Subcommands:
    solve      design the periodic gain schedule and write it to disk
    simulate   run the closed loop under a stored schedule, export CSV
    field      export the dipole field over one orbit as CSV
    check      run the invariant suite

Exit codes: 0 success, 1 usage/config error, 2 numerical failure,
3 check-suite failure.
"""

import argparse
import json
import sys
from typing import List, Optional

from magnetic_lqr.core.config import settings
from magnetic_lqr.core.exceptions import (
    CheckFailed,
    ConfigError,
    MagneticLQRError,
    NumericalError,
)
from magnetic_lqr.cli.commands import cmd_check, cmd_field, cmd_simulate, cmd_solve
from magnetic_lqr.utils.logger import setup_logger

logger = setup_logger("magnetic_lqr")


class _ArgumentParser(argparse.ArgumentParser):
    """Report usage errors through ConfigError so they exit with 1."""

    def error(self, message: str):
        raise ConfigError(f"usage: {message}")


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with the four subcommands."""
    parser = _ArgumentParser(
        prog="magnetic-lqr",
        description=f"{settings.APP_NAME} {settings.APP_VERSION}: periodic LQR design for magnetorquer attitude control",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python -m magnetic_lqr.main solve --config configs/leo_657km.yaml --out out/
  python -m magnetic_lqr.main simulate --config configs/leo_657km.yaml --schedule out/schedule.npz --plots
  python -m magnetic_lqr.main field --config configs/leo_657km.yaml --samples 500
  python -m magnetic_lqr.main check --config configs/leo_657km.yaml
        """,
    )
    subparsers = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    def add_common(sub: argparse.ArgumentParser) -> None:
        sub.add_argument("--config", required=True, help="YAML run config")
        sub.add_argument("--out", default=None, help="Output directory (defaults to output.directory)")

    solve = subparsers.add_parser("solve", help="Design the gain schedule")
    add_common(solve)
    solve.add_argument(
        "--solver",
        choices=["gamma", "pi", "eigen", "recursion"],
        default=None,
        help="Solver (defaults to solver.tag in the config)",
    )

    simulate = subparsers.add_parser("simulate", help="Closed-loop simulation")
    add_common(simulate)
    simulate.add_argument("--schedule", default=None, help="Schedule file (defaults to <out>/schedule.npz)")
    simulate.add_argument("--plots", action="store_true", help="Render one PNG per state")

    field = subparsers.add_parser("field", help="Dipole field over one orbit")
    add_common(field)
    field.add_argument("--samples", type=int, default=200, help="Number of samples (>= 2)")

    check = subparsers.add_parser("check", help="Run the invariant suite")
    add_common(check)

    return parser


def _run(args: argparse.Namespace) -> dict:
    if args.command == "solve":
        return cmd_solve(args.config, out=args.out, solver=args.solver)
    if args.command == "simulate":
        return cmd_simulate(args.config, schedule_path=args.schedule, out=args.out, plots=args.plots)
    if args.command == "field":
        return cmd_field(args.config, num_samples=args.samples, out=args.out)
    return cmd_check(args.config, out=args.out)


def main(argv: Optional[List[str]] = None) -> int:
    """
    Parse arguments, run the command and return its exit code.
    """
    try:
        args = build_parser().parse_args(argv)
        report = _run(args)
    except CheckFailed as exc:
        logger.error(exc.message)
        print(json.dumps(exc.detail, indent=2, default=str))
        return exc.exit_code
    except ConfigError as exc:
        logger.error(f"Configuration error: {exc.message}", extra={"error_type": type(exc).__name__})
        print(json.dumps(exc.to_dict(), indent=2, default=str), file=sys.stderr)
        return exc.exit_code
    except NumericalError as exc:
        logger.error(f"Numerical failure: {exc.message}", extra={"error_type": type(exc).__name__})
        print(json.dumps(exc.to_dict(), indent=2, default=str), file=sys.stderr)
        return exc.exit_code
    except MagneticLQRError as exc:
        logger.error(exc.message)
        return exc.exit_code
    except Exception as exc:
        logger.error(f"Unhandled exception: {exc}", exc_info=True)
        raise

    print(json.dumps(report, indent=2, default=str))
    return 0


if __name__ == "__main__":
    sys.exit(main())
