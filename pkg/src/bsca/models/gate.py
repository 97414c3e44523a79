"""
Models for multiple-outcome summaries.
"""

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from bsca.models.posterior import BmaPosterior
from bsca.models.space import Exploration

GATE_CAVEAT = (
    "The GATE weights all outcomes equally; with strongly correlated outcomes it may "
    "not measure a sensible parameter. Per treatment-outcome summaries are primary."
)

PARTIAL_CORRELATION_SIGN_NOTE = (
    "rho_j = beta_j * sqrt(var(x_j | y, x_-j, z) / var(y | x, z)); the sign follows "
    "beta_j and the residual-residual correlation. A leading minus sign found in some "
    "statements of this formula is not applied."
)


class OutcomeSummary(BaseModel):
    """Single-outcome pipeline result for one outcome."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    outcome: str
    exploration: Exploration
    posteriors: dict[str, BmaPosterior]


class OutcomeTable(BaseModel):
    """Per-outcome summaries keyed by (treatment, outcome), with per-outcome failures."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    summaries: dict[str, OutcomeSummary] = Field(default_factory=dict)
    errors: dict[str, str] = Field(default_factory=dict)

    def cell(self, treatment: str, outcome: str) -> BmaPosterior:
        return self.summaries[outcome].posteriors[treatment]

    def cells(self) -> dict[tuple[str, str], BmaPosterior]:
        return {
            (treatment, outcome): posterior
            for outcome, summary in self.summaries.items()
            for treatment, posterior in summary.posteriors.items()
        }


class GateResult(BaseModel):
    """
    Global average treatment effects from the mean-outcome regression.

    ``gate_by_treatment`` holds the posteriors of the mean-outcome treatment
    coefficients; ``pair_means`` the per-(treatment, outcome) BMA means and
    ``pair_average`` their average over outcomes, reported alongside.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    outcomes: list[str]
    treatments: list[str]
    mean_outcome: OutcomeSummary
    mean_outcome_columns: dict[str, BmaPosterior]
    gate_by_treatment: dict[str, BmaPosterior]
    gate: BmaPosterior
    pair_means: dict[str, dict[str, float]] = Field(default_factory=dict)
    pair_average: dict[str, float] = Field(default_factory=dict)
    caveat: str = GATE_CAVEAT


class IdentityCheck(BaseModel):
    """Mean-outcome versus averaged per-outcome least-squares coefficients."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    columns: tuple[int, ...]
    per_outcome: np.ndarray
    averaged: np.ndarray
    mean_outcome: np.ndarray
    max_abs_difference: float


class PartialCorrelationResult(BaseModel):
    """BMA posterior of a partial correlation with its bookkeeping."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    treatment: str
    posterior: BmaPosterior
    treatment_residual_variance: float
    bound_violations: int
    sign_note: str = PARTIAL_CORRELATION_SIGN_NOTE
