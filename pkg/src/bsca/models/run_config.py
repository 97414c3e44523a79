"""
Run configuration: the JSON document that describes one analysis.
"""

from pathlib import Path
from typing import Literal

from pydantic import BaseModel, Field, ValidationError, model_validator

from bsca.exceptions import ConfigurationError
from bsca.models.data import DesignOptions, Family, Role, TreatmentCoding


class OutcomeConfig(BaseModel):
    """An outcome column and its family."""

    name: str
    family: Family = Family.GAUSSIAN


class TreatmentConfig(TreatmentCoding):
    """A treatment column and its coding."""

    name: str


class ControlConfig(BaseModel):
    """A control column; categorical controls expand to a reference-coded block."""

    name: str
    kind: Literal["continuous", "categorical"] = "continuous"


class SpaceConfig(BaseModel):
    """Model-space policy."""

    forced_in: list[str] = Field(
        default_factory=list, description="Block names forced into every model"
    )
    free_treatments: bool = False
    interactions: bool = False
    heredity: Literal["strong"] = "strong"


class EngineConfig(BaseModel):
    """How the model space is explored."""

    kind: Literal["enumerate", "gibbs"] = "enumerate"
    iters: int | None = Field(default=None, ge=1)
    burnin: int | None = Field(default=None, ge=0)
    enumeration_cap: int | None = Field(default=None, ge=1)


class ScaConfig(BaseModel):
    """How the classical specification list is generated and tested."""

    method: Literal["bootstrap", "permutation"] | None = None
    draws: int | None = Field(default=None, ge=100)
    treatment_sets: Literal["joint", "separate"] = "joint"
    control_sets: Literal["all_subsets", "none_or_all"] = "all_subsets"
    subsets: bool = False


class RunConfig(BaseModel):
    """
    Complete description of an analysis.

    Numerical knobs left as None fall back to the process settings.
    """

    data: Path
    outcomes: list[OutcomeConfig] = Field(min_length=1)
    treatments: list[TreatmentConfig] = Field(min_length=1)
    controls: list[ControlConfig] = Field(default_factory=list)
    subgroups: list[str] = Field(default_factory=list)
    space: SpaceConfig = Field(default_factory=SpaceConfig)
    engine: EngineConfig = Field(default_factory=EngineConfig)
    sca: ScaConfig = Field(default_factory=ScaConfig)
    gamma: float | None = Field(default=None, ge=0.0)
    threshold: float | None = Field(default=None, gt=0.0, lt=1.0)
    draws: int | None = Field(default=None, ge=100)
    top_models: int | None = Field(default=None, ge=1)
    seed: int | None = None
    output_dir: Path = Path("bsca-out")
    gate: bool = True
    partial_correlations: bool = False

    @model_validator(mode="after")
    def _check_unique_columns(self) -> "RunConfig":
        names = self.column_names()
        if duplicated := sorted({name for name in names if names.count(name) > 1}):
            raise ConfigurationError(f"Columns assigned more than one role: {duplicated}")
        return self

    @classmethod
    def from_file(cls, path: Path) -> "RunConfig":
        """Parse a JSON run configuration; relative data paths resolve against it."""
        try:
            config = cls.model_validate_json(Path(path).read_text(encoding="utf-8"))
        except OSError as error:
            raise ConfigurationError(f"Cannot read configuration {path}: {error}") from error
        except ValidationError as error:
            raise ConfigurationError(f"Invalid configuration {path}: {error}") from error
        if not config.data.is_absolute():
            config = config.model_copy(update={"data": Path(path).parent / config.data})
        return config

    def column_names(self) -> list[str]:
        return (
            [outcome.name for outcome in self.outcomes]
            + [treatment.name for treatment in self.treatments]
            + [control.name for control in self.controls]
            + list(self.subgroups)
        )

    def roles(self) -> dict[str, Role]:
        roles = {outcome.name: Role.OUTCOME for outcome in self.outcomes}
        roles.update({treatment.name: Role.TREATMENT for treatment in self.treatments})
        roles.update({control.name: Role.CONTROL for control in self.controls})
        roles.update({subgroup: Role.SUBGROUP for subgroup in self.subgroups})
        return roles

    def families(self) -> dict[str, Family]:
        return {outcome.name: outcome.family for outcome in self.outcomes}

    def design_options(self) -> DesignOptions:
        return DesignOptions(
            interactions=self.space.interactions,
            treatment_codings={
                treatment.name: TreatmentCoding(
                    **treatment.model_dump(exclude={"name"})
                )
                for treatment in self.treatments
            },
            categorical_controls=[
                control.name for control in self.controls if control.kind == "categorical"
            ],
        )

    def require_seed(self) -> int:
        """The run seed; every stochastic step needs one."""
        if self.seed is None:
            raise ConfigurationError(
                "A seed is required (set 'seed' in the configuration or pass --seed)"
            )
        return self.seed
