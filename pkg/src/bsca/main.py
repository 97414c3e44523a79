import argparse
import logging
import sys

from bsca import __version__
from bsca.config import settings
from bsca.handlers.plot_handler import PlotHandler
from bsca.handlers.run_handler import RunHandler
from bsca.handlers.sca_handler import ScaHandler
from bsca.handlers.sim_handler import SimHandler
from bsca.storage.file_repository import to_json


def create_application(parser: argparse.ArgumentParser | None = None) -> argparse.ArgumentParser:
    """Create and configure the command-line application.

    Args:
        parser: Optional parser (creates one if not provided)

    Returns:
        Parser with every subcommand registered
    """
    # Tests can pass their own parser
    parser = (
        parser
        if parser is not None
        else argparse.ArgumentParser(
            prog="bsca", description="Bayesian specification curve analysis"
        )
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)

    # Initialize and register all handlers
    RunHandler(subparsers)
    ScaHandler(subparsers)
    SimHandler(subparsers)
    PlotHandler(subparsers)

    return parser


def main(argv: list[str] | None = None) -> int:
    """Run one subcommand and print its result record as JSON.

    Returns:
        0 on success, 1 on a failed analysis, 2 on a usage or configuration error
    """
    # Logs go to stderr; stdout carries the result record
    logging.basicConfig(
        level=settings.log_level_value,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
    )
    args = create_application().parse_args(argv)
    code, record = args.handler.handle(args)
    sys.stdout.write(to_json(record))
    return code


if __name__ == "__main__":
    sys.exit(main())
