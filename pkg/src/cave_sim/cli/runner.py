"""Orchestrate the subcommands.

This module wires adapters and domain together and turns every outcome into a
process exit code: 0 success, 1 oracle tolerance exceeded, 2 invalid input,
3 I/O failure.
"""

import dataclasses
import logging
import sys

from result import Err, Ok

from cave_sim.adapters.input.json_file import JsonFileSource, load_scenario, load_sweep
from cave_sim.adapters.output.console import ConsoleEmitter
from cave_sim.adapters.output.csv_writer import CsvReportWriter
from cave_sim.cli.parser import CLIArgs, OracleArgs, RunArgs, SweepArgs
from cave_sim.domain.config import ScenarioConfig, validated
from cave_sim.domain.engine import run
from cave_sim.domain.oracles import run_oracle
from cave_sim.domain.sweep import run_sweep
from cave_sim.domain.types import BoundaryResult, Failure, FailureKind
from cave_sim.ports.report_sink import ReportSink

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_TOLERANCE = 1
EXIT_INVALID = 2
EXIT_IO = 3


def exit_code(failure: Failure) -> int:
    match failure.kind:
        case FailureKind.TOLERANCE:
            return EXIT_TOLERANCE
        case FailureKind.INVALID:
            return EXIT_INVALID
        case FailureKind.IO:
            return EXIT_IO


def _console() -> ConsoleEmitter:
    # resolved per call so redirected streams are honored
    return ConsoleEmitter(stdout=sys.stdout, stderr=sys.stderr)


def _fail(failure: Failure) -> int:
    _console().emit_failure(failure)
    return exit_code(failure)


def scenario_for(args: RunArgs) -> BoundaryResult[ScenarioConfig]:
    """Scenario from the config file (or defaults) with the command-line overrides applied."""
    match load_scenario(JsonFileSource(args.config)) if args.config else Ok(ScenarioConfig()):
        case Err(failure):
            return Err(failure)
        case Ok(scenario):
            pass
    overrides = {
        name: value
        for name, value in (
            ("seed", args.seed),
            ("scheduler", args.scheduler),
            ("duration", args.duration),
        )
        if value is not None
    }
    return validated(dataclasses.replace(scenario, **overrides)).map_err(
        lambda message: Failure(FailureKind.INVALID, message)
    )


def cmd_run(args: RunArgs, sink: ReportSink | None = None) -> int:
    """Simulate one scenario and write ``tasks.csv`` and ``summary.json``."""
    match scenario_for(args):
        case Err(failure):
            return _fail(failure)
        case Ok(scenario):
            pass
    match run(scenario):
        case Err(message):
            return _fail(Failure(FailureKind.INVALID, message))
        case Ok(report):
            pass
    writer = sink if sink is not None else CsvReportWriter(args.out)
    match writer.write_report(report):
        case Err(failure):
            return _fail(failure)
        case Ok(paths):
            logger.info("wrote %s", ", ".join(str(p) for p in paths))
    _console().emit_summary(report.summary)
    return EXIT_OK


def cmd_sweep(args: SweepArgs, sink: ReportSink | None = None) -> int:
    """Run a sweep and write ``sweep.csv``."""
    match load_sweep(JsonFileSource(args.sweep)):
        case Err(failure):
            return _fail(failure)
        case Ok(spec):
            pass
    match run_sweep(spec, jobs=args.jobs):
        case Err(message):
            return _fail(Failure(FailureKind.INVALID, message))
        case Ok(rows):
            pass
    writer = sink if sink is not None else CsvReportWriter(args.out)
    match writer.write_sweep(rows):
        case Err(failure):
            return _fail(failure)
        case Ok(paths):
            logger.info("wrote %d sweep rows to %s", len(rows), paths[0])
    return EXIT_OK


def cmd_oracle(args: OracleArgs) -> int:
    """Run an oracle suite; exit 1 when it misses its tolerance."""
    report = run_oracle(args.suite)
    _console().emit_oracle(report)
    return EXIT_OK if report.ok else EXIT_TOLERANCE


def dispatch(args: CLIArgs) -> int:
    """Run the subcommand selected on the command line."""
    try:
        match args:
            case RunArgs():
                return cmd_run(args)
            case SweepArgs():
                return cmd_sweep(args)
            case OracleArgs():
                return cmd_oracle(args)
    except KeyboardInterrupt:
        return _fail(Failure(FailureKind.IO, "Interrupted by user"))
