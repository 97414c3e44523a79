"""
Models related to maximum-likelihood GLM fits.
"""

import numpy as np
from pydantic import BaseModel, ConfigDict

from bsca.models.data import Family


class GlmFit(BaseModel):
    """
    Maximum-likelihood fit of a Gaussian or logistic regression.

    Attributes:
        family: Outcome family of the fit
        coefficients: Estimates aligned to the fitted design columns
        covariance: Inverse observed information at the estimate
        loglik: Maximized log-likelihood
        dispersion: Error variance MLE (RSS / n), Gaussian only
        n: Rows used
        k: Number of fitted columns
        converged: Whether the optimizer met its tolerance
        iterations: Newton iterations (0 for closed-form fits)
        degenerate: Zero residual variance; loglik is +inf
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    family: Family
    coefficients: np.ndarray
    covariance: np.ndarray
    loglik: float
    dispersion: float | None = None
    n: int
    k: int
    converged: bool = True
    iterations: int = 0
    degenerate: bool = False

    @property
    def standard_errors(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.covariance), 0.0, None))
