"""
Models for the classical specification curve.
"""

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field


class SpecDefinition(BaseModel):
    """
    One specification: an outcome, the treatments and controls it includes and,
    optionally, the subset of rows it is estimated on.
    """

    model_config = ConfigDict(frozen=True)

    outcome: str
    treatments: tuple[str, ...]
    controls: tuple[str, ...] = ()
    subset: tuple[str, int] | None = None

    @property
    def label(self) -> str:
        parts = [self.outcome, "+".join(self.treatments)]
        parts.append("+".join(self.controls) if self.controls else "no controls")
        if self.subset is not None:
            parts.append(f"{self.subset[0]}={self.subset[1]}")
        return " | ".join(parts)


class SpecEstimate(BaseModel):
    """Estimate of one treatment in one specification."""

    model_config = ConfigDict(frozen=True)

    spec_id: int
    spec: SpecDefinition
    treatment: str
    estimate: float
    se: float
    z: float
    p_value: float
    significant: bool


class SpecGap(BaseModel):
    """A specification that could not be fitted."""

    model_config = ConfigDict(frozen=True)

    spec_id: int
    spec: SpecDefinition
    reason: str


class SpecCurve(BaseModel):
    """Per-specification estimates sorted for display, with curve-level statistics."""

    model_config = ConfigDict(frozen=True)

    estimates: list[SpecEstimate]
    gaps: list[SpecGap] = Field(default_factory=list)
    median: float
    share_significant: float = Field(ge=0.0, le=1.0)
    mean_z: float


class MedianTestResult(BaseModel):
    """Resampling test of the curve's median effect."""

    model_config = ConfigDict(frozen=True)

    method: Literal["bootstrap", "permutation"]
    draws: int
    seed: int
    observed_median: float
    p_value: float
    null_medians: list[float]
