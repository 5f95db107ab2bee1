"""Entry point for the cave-sim CLI.

This module provides the main() function that serves as the entry point
for the cave-sim command-line tool.
"""

import logging
import sys

from result import Err, Ok

from cave_sim.cli.parser import HELP_REQUESTED, parse_args
from cave_sim.cli.runner import EXIT_INVALID, EXIT_OK, dispatch

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def main(argv: list[str] | None = None) -> int:
    """Main entry point for the CLI.

    Parses arguments, configures logging, runs the subcommand and returns its
    exit code.

    Returns:
        0 on success, 1 when an oracle misses its tolerance, 2 on invalid
        arguments or configuration, 3 on I/O failure

    Side Effects:
        - Reads scenario and sweep files
        - Writes result files and a short summary to stdout
        - Writes diagnostics to stderr
    """
    match parse_args(argv):
        case Err(error):
            if error == HELP_REQUESTED:
                return EXIT_OK
            print(f"Error: {error}", file=sys.stderr)
            return EXIT_INVALID
        case Ok(args):
            pass

    logging.basicConfig(level=args.log_level, format=LOG_FORMAT, stream=sys.stderr)
    return dispatch(args)


if __name__ == "__main__":
    sys.exit(main())
