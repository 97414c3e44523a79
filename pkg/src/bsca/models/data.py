"""
Models for ingested observations and their coded design matrix.
"""

from enum import Enum
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from bsca.exceptions import ConfigurationError, DomainError


class Role(str, Enum):
    """Role a dataset column plays in the regression."""

    OUTCOME = "outcome"
    TREATMENT = "treatment"
    CONTROL = "control"
    SUBGROUP = "subgroup"


class Family(str, Enum):
    """Outcome distribution; fixes the link function."""

    GAUSSIAN = "gaussian"
    BINOMIAL = "binomial"


class BlockKind(str, Enum):
    """Kind of a group of design columns toggled jointly."""

    INTERCEPT = "intercept"
    CONTROL = "control"
    TREATMENT = "treatment"
    SUBGROUP_MAIN = "subgroup-main"
    INTERACTION = "interaction"


def _frozen_array(values: np.ndarray) -> np.ndarray:
    array = np.array(values, dtype=float, copy=True)
    array.flags.writeable = False
    return array


class Dataset(BaseModel):
    """
    Columnar observations with role-tagged variables.

    Columns keep the order of the role assignment, which fixes the order of
    design columns downstream.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    columns: dict[str, np.ndarray]
    roles: dict[str, Role]
    families: dict[str, Family] = Field(default_factory=dict)
    dropped: int = 0

    @model_validator(mode="before")
    @classmethod
    def _freeze_columns(cls, data: dict) -> dict:
        if isinstance(data, dict) and "columns" in data:
            data = dict(data)
            data["columns"] = {
                name: _frozen_array(values) for name, values in data["columns"].items()
            }
        return data

    @model_validator(mode="after")
    def _check_invariants(self) -> "Dataset":
        lengths = {len(values) for values in self.columns.values()}
        if len(lengths) != 1 or lengths == {0}:
            raise ConfigurationError(
                "All columns must have the same length of at least one row"
            )
        if missing := set(self.roles) - set(self.columns):
            raise ConfigurationError(f"Role assigned to unknown columns: {sorted(missing)}")
        for name, values in self.columns.items():
            if not np.isfinite(values).all():
                raise DomainError(name, f"Column '{name}' contains missing or infinite values")
        for name in self.names(Role.OUTCOME):
            family = self.families.get(name, Family.GAUSSIAN)
            if family is Family.BINOMIAL and not np.isin(self.columns[name], (0.0, 1.0)).all():
                raise DomainError(
                    name, f"Binomial outcome '{name}' has values outside {{0, 1}}"
                )
        for name in self.names(Role.SUBGROUP):
            if not np.isin(self.columns[name], (0.0, 1.0)).all():
                raise DomainError(
                    name, f"Subgroup '{name}' must be a 0/1 membership indicator"
                )
        return self

    @property
    def n(self) -> int:
        """Number of observations."""
        return len(next(iter(self.columns.values())))

    def names(self, role: Role) -> list[str]:
        """Column names with the given role, in assignment order."""
        return [name for name, assigned in self.roles.items() if assigned is role]

    def family(self, outcome: str) -> Family:
        """Family of an outcome column (Gaussian unless configured otherwise)."""
        return self.families.get(outcome, Family.GAUSSIAN)


class TreatmentCoding(BaseModel):
    """How a raw treatment column is turned into design columns."""

    kind: Literal["binary", "continuous", "ordinal", "identity"] = "binary"
    max_report: float | None = Field(
        default=None, gt=0, description="Maximum reportable exposure (continuous)"
    )
    cutpoints: list[float] = Field(
        default_factory=list, description="Upper-inclusive level boundaries (ordinal)"
    )
    labels: list[str] | None = None

    @model_validator(mode="after")
    def _check_kind(self) -> "TreatmentCoding":
        if self.kind == "continuous" and self.max_report is None:
            raise ConfigurationError("Continuous treatment coding needs max_report")
        if self.kind == "ordinal":
            if not self.cutpoints:
                raise ConfigurationError("Ordinal treatment coding needs cutpoints")
            if list(self.cutpoints) != sorted(set(self.cutpoints)):
                raise ConfigurationError("Ordinal cutpoints must be strictly increasing")
            if self.labels is not None and len(self.labels) != len(self.cutpoints) + 1:
                raise ConfigurationError("Ordinal coding needs one label per level")
        return self


class DesignOptions(BaseModel):
    """Choices that shape the coded design."""

    interactions: bool = False
    treatment_codings: dict[str, TreatmentCoding] = Field(default_factory=dict)
    categorical_controls: list[str] = Field(default_factory=list)


class DesignBlock(BaseModel):
    """A group of design columns that enter or leave a model together."""

    model_config = ConfigDict(frozen=True)

    name: str
    kind: BlockKind
    columns: tuple[int, ...]
    treatment: str | None = None
    subgroups: tuple[str, ...] = ()


class CodedDesign(BaseModel):
    """
    Coded design matrix of the generalized linear specification.

    ``scales`` holds, per column, the factor that converts a coefficient back to
    the raw scale of its source variable (1 except for standardized controls).
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    matrix: np.ndarray
    column_names: tuple[str, ...]
    blocks: tuple[DesignBlock, ...]
    scales: tuple[float, ...]
    subgroup_shares: dict[str, float] = Field(default_factory=dict)

    @model_validator(mode="before")
    @classmethod
    def _freeze_matrix(cls, data: dict) -> dict:
        if isinstance(data, dict) and "matrix" in data:
            data = dict(data)
            data["matrix"] = _frozen_array(data["matrix"])
        return data

    @model_validator(mode="after")
    def _check_blocks(self) -> "CodedDesign":
        owned = sorted(column for block in self.blocks for column in block.columns)
        if owned != list(range(self.matrix.shape[1])):
            raise ConfigurationError("Every design column must belong to exactly one block")
        if len(self.column_names) != self.matrix.shape[1]:
            raise ConfigurationError("Column names do not match the design width")
        return self

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def block(self, name: str) -> DesignBlock:
        """Look up a block by name."""
        for block in self.blocks:
            if block.name == name:
                return block
        raise ConfigurationError(f"Unknown design block '{name}'")

    def column_index(self, name: str) -> int:
        """Position of a named design column."""
        try:
            return self.column_names.index(name)
        except ValueError as error:
            raise ConfigurationError(f"Unknown design column '{name}'") from error

    def blocks_of_kind(self, kind: BlockKind) -> list[DesignBlock]:
        return [block for block in self.blocks if block.kind is kind]

    def treatment_columns(self) -> list[int]:
        """Design columns holding treatment main effects, in design order."""
        return [
            column
            for block in self.blocks_of_kind(BlockKind.TREATMENT)
            for column in block.columns
        ]
