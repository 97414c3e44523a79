import argparse
import logging
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from bsca.exceptions import BscaError, ConfigurationError
from bsca.models.run_config import RunConfig
from bsca.storage.file_repository import FileResultRepository
from bsca.storage.repository import ResultRepository

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2


def error_record(command: str, error: Exception) -> dict[str, Any]:
    """Machine-readable description of a failed command."""
    known = isinstance(error, BscaError)
    return {
        "status": "error",
        "command": command,
        "error": type(error).__name__ if known else "UnexpectedError",
        "message": str(error),
        "details": error.details() if known else {"type": type(error).__name__},
    }


class BaseHandler(ABC):
    """A subcommand: registers its parser and turns its outcome into a result record."""

    command: str = ""
    help: str = ""

    def __init__(self, subparsers: argparse._SubParsersAction) -> None:
        # Register the subcommand
        parser = subparsers.add_parser(self.command, help=self.help, description=self.help)
        self.add_arguments(parser)
        parser.set_defaults(handler=self)
        self.repository: ResultRepository | None = None

    @abstractmethod
    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        """
        Declare the subcommand's flags.

        Args:
            parser: Parser of the subcommand
        """
        pass

    @abstractmethod
    def execute(self, args: argparse.Namespace) -> dict[str, Any]:
        """
        Run the subcommand.

        Args:
            args: Parsed command-line arguments

        Returns:
            Dict[str, Any]: Result record fields
        """
        pass

    def create_repository(self, directory: Path | str) -> ResultRepository:
        """Open the output location; subclasses call this once it is known."""
        self.repository = FileResultRepository(directory)
        return self.repository

    def handle(self, args: argparse.Namespace) -> tuple[int, dict[str, Any]]:
        """
        Execute and map the outcome to an exit code and a result record.

        Configuration problems are usage errors (exit code 2); any other
        failure exits with 1 and leaves an error record in the output
        directory when it is writable.
        """
        self.repository = None
        try:
            record = self.execute(args)
            return EXIT_OK, {"status": "ok", "command": self.command, **record}
        except ConfigurationError as e:
            logger.error(f"Configuration error: {str(e)}")
            code, record = EXIT_USAGE, error_record(self.command, e)
        except BscaError as e:
            logger.error(f"{type(e).__name__}: {str(e)}")
            code, record = EXIT_ERROR, error_record(self.command, e)
        except Exception as e:
            logger.error(
                f"Unexpected error in {self.__class__.__name__}: {str(e)}", exc_info=True
            )
            code, record = EXIT_ERROR, error_record(self.command, e)

        repository = self.repository
        if repository is None and getattr(args, "out", None):
            repository = FileResultRepository(args.out)
        if repository is not None:
            path = repository.write_error(record)
            if path is not None:
                record["error_file"] = str(path)
        return code, record


def add_config_arguments(parser: argparse.ArgumentParser) -> None:
    """Flags shared by the commands that read a run configuration."""
    parser.add_argument("--config", required=True, type=Path, help="JSON run configuration")
    parser.add_argument("--data", type=Path, help="CSV data file (overrides the configuration)")
    parser.add_argument("--out", type=Path, help="Output directory")
    parser.add_argument("--seed", type=int, help="Seed of every random step")


def load_config(args: argparse.Namespace, **overrides: Any) -> RunConfig:
    """
    Read the run configuration and apply command-line overrides.

    Args:
        args: Parsed arguments holding at least ``config``, ``data``, ``out``, ``seed``
        overrides: Further configuration fields, nested as dicts; None values are ignored

    Raises:
        ConfigurationError: If the file or the overridden configuration is invalid
    """
    config = RunConfig.from_file(args.config)
    document = config.model_dump()
    top_level = {"data": args.data, "output_dir": args.out, "seed": args.seed}
    for key, value in {**top_level, **overrides}.items():
        if isinstance(value, dict):
            document[key].update({name: item for name, item in value.items() if item is not None})
        elif value is not None:
            document[key] = value
    try:
        return RunConfig.model_validate(document)
    except ValidationError as error:
        raise ConfigurationError(f"Invalid configuration overrides: {error}") from error
