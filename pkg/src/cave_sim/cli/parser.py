"""CLI argument parsing using argparse.

This module handles command-line argument parsing and validation.
Returns immutable argument dataclasses using Railway-Oriented Programming.
"""

import argparse
from dataclasses import dataclass
from pathlib import Path

from result import Err, Ok, Result

from cave_sim.domain.config import SchedulerKind
from cave_sim.domain.oracles import OracleSuite

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")
HELP_REQUESTED = "Help requested"


@dataclass(frozen=True, slots=True)
class RunArgs:
    """Arguments of ``cave-sim run``; unset overrides are None.

    Examples:
        >>> args = RunArgs(config=None, out=Path("out"), seed=7, scheduler=None,
        ...                duration=None, log_level="WARNING")
        >>> args.seed
        7
    """

    config: Path | None
    out: Path
    seed: int | None
    scheduler: SchedulerKind | None
    duration: float | None
    log_level: str


@dataclass(frozen=True, slots=True)
class SweepArgs:
    sweep: Path
    out: Path
    jobs: int
    log_level: str


@dataclass(frozen=True, slots=True)
class OracleArgs:
    suite: OracleSuite
    log_level: str


type CLIArgs = RunArgs | SweepArgs | OracleArgs


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected an integer >= 1, got {text}")
    return value


def _non_negative_float(text: str) -> float:
    value = float(text)
    if not value >= 0:
        raise argparse.ArgumentTypeError(f"expected a number >= 0, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cave-sim",
        description="Simulate crowdsourced in-vehicle edge computing and its schedulers",
        epilog="""
Examples:
  cave-sim run --config scenario.json --out results/ --seed 7
  cave-sim run --scheduler baseline --duration 10 --out results/
  cave-sim sweep --sweep intensity.json --out results/ --jobs 4
  cave-sim oracle allocation
        """,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument(
        "--log-level",
        choices=LOG_LEVELS,
        default="WARNING",
        help="Logging threshold for messages on stderr (default: WARNING)",
    )
    commands = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    run = commands.add_parser("run", help="Simulate one scenario")
    run.add_argument(
        "--config", type=Path, metavar="FILE", help="Scenario JSON (default: all defaults)"
    )
    run.add_argument("--out", type=Path, required=True, metavar="DIR", help="Output directory")
    run.add_argument("--seed", type=int, help="Override the scenario seed")
    run.add_argument(
        "--scheduler",
        choices=[kind.value for kind in SchedulerKind],
        help="Override the scenario scheduler",
    )
    run.add_argument(
        "--duration", type=_non_negative_float, metavar="SECONDS", help="Override simulated time"
    )

    sweep = commands.add_parser("sweep", help="Run a parameter sweep")
    sweep.add_argument("--sweep", type=Path, required=True, metavar="FILE", help="Sweep JSON")
    sweep.add_argument("--out", type=Path, required=True, metavar="DIR", help="Output directory")
    sweep.add_argument(
        "--jobs", type=_positive_int, default=1, help="Worker processes (default: 1)"
    )

    oracle = commands.add_parser("oracle", help="Cross-check the optimizers")
    oracle.add_argument("suite", choices=[suite.value for suite in OracleSuite])
    return parser


def parse_args(argv: list[str] | None = None) -> Result[CLIArgs, str]:
    """Parse CLI arguments using argparse.

    Args:
        argv: Arguments to parse (defaults to sys.argv)

    Returns:
        Result containing the arguments of one subcommand or an error message

    Examples:
        >>> parse_args(["oracle", "allocation"]).ok_value.suite
        <OracleSuite.ALLOCATION: 'allocation'>
        >>> parse_args(["run", "--out", "o", "--seed", "3"]).ok_value.seed
        3
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits on error or --help
        return Err(HELP_REQUESTED if e.code == 0 else "Invalid arguments")

    match args.command:
        case "run":
            return Ok(
                RunArgs(
                    config=args.config,
                    out=args.out,
                    seed=args.seed,
                    scheduler=SchedulerKind(args.scheduler) if args.scheduler else None,
                    duration=args.duration,
                    log_level=args.log_level,
                )
            )
        case "sweep":
            return Ok(
                SweepArgs(sweep=args.sweep, out=args.out, jobs=args.jobs, log_level=args.log_level)
            )
        case "oracle":
            return Ok(OracleArgs(suite=OracleSuite(args.suite), log_level=args.log_level))
        case _:
            return Err(f"Unknown command: {args.command}")
