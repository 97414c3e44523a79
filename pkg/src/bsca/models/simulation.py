"""
Models for the Monte Carlo simulation harness.
"""

from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from bsca.exceptions import ConfigurationError


class SimScenario(BaseModel):
    """
    One data-generating configuration.

    ``beta`` is a J x L matrix of true effects (one column per outcome);
    ``sigma`` the L x L error covariance (identity when omitted).
    """

    model_config = ConfigDict(frozen=True)

    name: str
    n: int = Field(default=1000, ge=10)
    beta: list[list[float]]
    sigma: list[list[float]] | None = None
    replicates: int = Field(default=100, ge=1)
    master_seed: int = 0
    sca_method: Literal["bootstrap", "permutation"] = "bootstrap"
    sca_draws: int = Field(default=500, ge=100)
    run_sca: bool = True

    @model_validator(mode="after")
    def _check_shapes(self) -> "SimScenario":
        widths = {len(row) for row in self.beta}
        if not self.beta or len(widths) != 1 or widths == {0}:
            raise ConfigurationError("beta must be a non-empty rectangular J x L matrix")
        if self.sigma is not None:
            sigma = np.asarray(self.sigma, dtype=float)
            if sigma.shape != (self.L, self.L):
                raise ConfigurationError(f"sigma must be {self.L} x {self.L}")
            if not np.allclose(sigma, sigma.T):
                raise ConfigurationError("sigma must be symmetric")
            if np.linalg.eigvalsh(sigma).min() <= 0:
                raise ConfigurationError("sigma must be positive definite")
        return self

    @property
    def J(self) -> int:
        return len(self.beta)

    @property
    def L(self) -> int:
        return len(self.beta[0])

    @property
    def beta_matrix(self) -> np.ndarray:
        return np.asarray(self.beta, dtype=float)

    @property
    def sigma_matrix(self) -> np.ndarray:
        if self.sigma is None:
            return np.eye(self.L)
        return np.asarray(self.sigma, dtype=float)


class SimRow(BaseModel):
    """Bias, RMSE and rejection rate of one estimator for one target."""

    model_config = ConfigDict(frozen=True)

    scenario: str
    estimator: str
    target: str
    truth: float
    bias: float
    rmse: float
    rejection_rate: float = Field(ge=0.0, le=1.0)
    replicates: int
    failed: int = 0


class SimReport(BaseModel):
    """Aggregated results of a simulation scenario."""

    model_config = ConfigDict(frozen=True)

    scenario: str
    rows: list[SimRow] = Field(default_factory=list)
    runtime_seconds: float = 0.0
    master_seed: int = 0
    replicate_seeds: list[list[int]] = Field(default_factory=list)
    sca_method: str | None = None
    factorization: str = "symmetric square root (eigendecomposition)"

    def row(self, estimator: str, target: str) -> SimRow:
        for row in self.rows:
            if row.estimator == estimator and row.target == target:
                return row
        raise KeyError(f"No row for {estimator}/{target}")
