"""
Models for Bayesian model averaging posteriors and their derived summaries.
"""

import numpy as np
from pydantic import BaseModel, ConfigDict, Field


class MixtureComponent(BaseModel):
    """Gaussian component contributed by one model that includes the coefficient."""

    model_config = ConfigDict(frozen=True)

    weight: float
    mean: float
    sd: float
    mask: int | None = None


class BmaPosterior(BaseModel):
    """
    Mixture posterior of one scalar quantity.

    A point mass at zero carries ``zero_mass`` (the weight of the models that
    exclude the quantity); the remaining mass is spread over ``components``.
    The interval is equal-tailed and computed from ``draws``.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    name: str
    p_inc: float = Field(ge=0.0, le=1.0)
    zero_mass: float = Field(ge=0.0, le=1.0)
    components: list[MixtureComponent] = Field(default_factory=list)
    mean: float
    lower: float
    upper: float
    level: float = 0.95
    interval_kind: str = "equal-tailed"
    interval_flag: str | None = None
    draws: np.ndarray


class NonzeroDecision(BaseModel):
    """Outcome of the inclusion-probability test of a zero effect."""

    model_config = ConfigDict(frozen=True)

    name: str
    reject: bool
    p_inc: float
    threshold: float


class OddsRatioSummary(BaseModel):
    """Posterior summary of a log-odds coefficient on the odds-ratio scale."""

    model_config = ConfigDict(frozen=True)

    name: str
    odds_ratio: float = Field(description="exp of the posterior mean log-odds ratio")
    mean_odds_ratio: float = Field(description="posterior mean of exp(beta)")
    lower: float
    upper: float
    level: float
