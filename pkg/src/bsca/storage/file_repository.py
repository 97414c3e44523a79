import json
import logging
import os
from pathlib import Path
from typing import Any

import pandas as pd

from bsca.exceptions import StorageError
from bsca.storage.repository import ResultRepository

logger = logging.getLogger(__name__)

ERROR_RECORD = "error.json"


def to_json(document: dict[str, Any]) -> str:
    """Deterministic JSON text: fixed indentation, no non-finite numbers."""
    try:
        return json.dumps(document, indent=2, allow_nan=False, ensure_ascii=False) + "\n"
    except (TypeError, ValueError) as error:
        raise StorageError(f"Document is not serializable as JSON: {error}") from error


class FileResultRepository(ResultRepository):
    """Repository writing results as files into one output directory."""

    def __init__(self, directory: Path | str):
        """Initialize the repository.

        Args:
            directory: Output directory, created on commit when missing
        """
        self.directory = Path(directory)
        self._staged: dict[str, str] = {}

    def stage_text(self, name: str, text: str) -> None:
        self._staged[name] = text

    def stage_json(self, name: str, document: dict[str, Any]) -> None:
        self._staged[name] = to_json(document)

    def stage_frame(self, name: str, frame: pd.DataFrame) -> None:
        self._staged[name] = frame.to_csv(index=False, lineterminator="\n")

    @property
    def staged(self) -> list[str]:
        """Names staged and not yet committed."""
        return list(self._staged)

    def _write(self, name: str, text: str) -> Path:
        path = self.directory / name
        temporary = path.with_name(f".{path.name}.partial")
        temporary.write_text(text, encoding="utf-8", newline="\n")
        os.replace(temporary, path)
        return path

    def commit(self) -> list[Path]:
        """Write every staged output into the directory.

        Each file is written to a temporary name and moved into place.

        Raises:
            StorageError: If the directory or a file cannot be written
        """
        try:
            self.directory.mkdir(parents=True, exist_ok=True)
            written = [self._write(name, text) for name, text in self._staged.items()]
        except OSError as error:
            logger.error(f"Failed to write results to {self.directory}: {error}")
            raise StorageError(f"Cannot write results to {self.directory}: {error}") from error
        stale = self.directory / ERROR_RECORD
        if stale.exists() and ERROR_RECORD not in self._staged:
            stale.unlink()
        logger.info(f"Wrote {len(written)} files to {self.directory}")
        self._staged.clear()
        return written

    def write_error(self, record: dict[str, Any]) -> Path | None:
        self._staged.clear()
        try:
            self.directory.mkdir(parents=True, exist_ok=True)
            return self._write(ERROR_RECORD, to_json(record))
        except (OSError, StorageError) as error:
            logger.warning(f"Could not write error record to {self.directory}: {error}")
            return None

    def read_json(self, name: str) -> dict[str, Any]:
        path = self.directory / name
        try:
            return json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as error:
            raise StorageError(f"Cannot read {path}: {error}") from error

    def read_frame(self, name: str) -> pd.DataFrame:
        path = self.directory / name
        try:
            return pd.read_csv(
                path, keep_default_na=False, na_values=[""], float_precision="round_trip"
            )
        except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as error:
            raise StorageError(f"Cannot read {path}: {error}") from error

    def exists(self, name: str) -> bool:
        return (self.directory / name).is_file()
