"""Custom exceptions for the BSCA toolkit."""

from typing import Any


class BscaError(Exception):
    """Base exception for all BSCA errors."""

    def details(self) -> dict[str, Any]:
        """Machine-readable context for error records."""
        return {}


class ConfigurationError(BscaError):
    """Raised when the run configuration or role assignment is invalid."""

    pass


class DataParseError(BscaError):
    """Raised when a cell of a numeric column is not a finite number."""

    def __init__(self, row: int, column: str, value: Any, message: str | None = None):
        """
        Initialize with the location of the offending cell.

        Args:
            row: 1-based data row (header excluded)
            column: Column name
            value: Raw cell content
            message: Optional error message
        """
        self.row = row
        self.column = column
        self.value = value
        super().__init__(
            message
            or f"Value {value!r} in column '{column}' at data row {row} is not a finite number"
        )

    def details(self) -> dict[str, Any]:
        return {"row": self.row, "column": self.column, "value": str(self.value)}


class DomainError(BscaError):
    """Raised when a value lies outside the admissible domain of its column."""

    def __init__(self, column: str, message: str):
        self.column = column
        super().__init__(message)

    def details(self) -> dict[str, Any]:
        return {"column": self.column}


class DegenerateSubgroupError(BscaError):
    """Raised when a subgroup has all or none of the rows as members."""

    def __init__(self, column: str):
        self.column = column
        super().__init__(
            f"Subgroup '{column}' is constant; its coded column would not vary"
        )

    def details(self) -> dict[str, Any]:
        return {"column": self.column}


class CollinearityError(BscaError):
    """Raised when a block makes the full design rank deficient."""

    def __init__(self, block: str):
        self.block = block
        super().__init__(
            f"Block '{block}' is an exact linear combination of earlier design columns"
        )

    def details(self) -> dict[str, Any]:
        return {"block": self.block}


class FitError(BscaError):
    """Base class for failures of a single model fit."""

    pass


class SingularDesignError(FitError):
    """Raised when the design submatrix is not of full column rank."""

    pass


class InsufficientDataError(FitError):
    """Raised when there are no more rows than columns."""

    pass


class SeparationError(FitError):
    """Raised when a logistic fit shows complete or quasi-complete separation."""

    pass


class NonConvergenceError(FitError):
    """Raised when IRLS exhausts its iteration budget."""

    def __init__(self, trace: list[float], message: str | None = None):
        """
        Initialize with the gradient trace.

        Args:
            trace: Gradient max-norm after each iteration
            message: Optional error message
        """
        self.trace = trace
        super().__init__(
            message or f"IRLS did not converge after {len(trace)} iterations"
        )

    def details(self) -> dict[str, Any]:
        return {"trace": self.trace}


class NoValidModelError(BscaError):
    """Raised when every explored model has an infinite EBIC."""

    pass


class EnumerationCapError(BscaError):
    """Raised when full enumeration is requested for too large a space."""

    def __init__(self, count: int, cap: int):
        self.count = count
        self.cap = cap
        super().__init__(
            f"Model space has {count} models, above the enumeration cap of {cap}; "
            "use gibbs_search (engine 'gibbs') instead"
        )

    def details(self) -> dict[str, Any]:
        return {"count": self.count, "cap": self.cap}


class MisuseError(BscaError):
    """Raised when an operation is called for a family it does not support."""

    pass


class EmptyCurveError(BscaError):
    """Raised when every specification of a curve failed to fit."""

    pass


class FamilyError(BscaError):
    """Raised when an operation requires a different outcome family."""

    pass


class UnsupportedMeasureError(BscaError):
    """Raised when an association measure is not defined for the model."""

    pass


class StorageError(BscaError):
    """Raised when results cannot be written or read back."""

    pass
