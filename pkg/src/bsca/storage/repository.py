# storage/repository.py
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any

import pandas as pd


class ResultRepository(ABC):
    """Destination of the files a command produces.

    Outputs are staged while a command runs and written together by ``commit``,
    so a failed run never leaves a partial set of result files behind.
    """

    @abstractmethod
    def stage_text(self, name: str, text: str) -> None:
        """
        Stage a text file.

        Args:
            name: File name relative to the output location
            text: File content
        """
        pass

    @abstractmethod
    def stage_json(self, name: str, document: dict[str, Any]) -> None:
        """
        Stage a JSON document.

        Args:
            name: File name relative to the output location
            document: JSON-serializable mapping
        """
        pass

    @abstractmethod
    def stage_frame(self, name: str, frame: pd.DataFrame) -> None:
        """
        Stage a table as CSV.

        Args:
            name: File name relative to the output location
            frame: Table to write, without its index
        """
        pass

    @abstractmethod
    def commit(self) -> list[Path]:
        """
        Write every staged output.

        Returns:
            Paths written, in staging order

        Raises:
            StorageError: If an output cannot be written
        """
        pass

    @abstractmethod
    def write_error(self, record: dict[str, Any]) -> Path | None:
        """
        Write an error record, discarding staged outputs.

        Returns:
            Path of the record, or None when the location is not writable
        """
        pass

    @abstractmethod
    def read_json(self, name: str) -> dict[str, Any]:
        """
        Read a previously written JSON document.

        Raises:
            StorageError: If the document is missing or malformed
        """
        pass

    @abstractmethod
    def read_frame(self, name: str) -> pd.DataFrame:
        """
        Read a previously written CSV table.

        Raises:
            StorageError: If the table is missing or malformed
        """
        pass

    @abstractmethod
    def exists(self, name: str) -> bool:
        """Whether a previously written output exists."""
        pass
