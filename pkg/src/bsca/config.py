"""Configuration management for the BSCA toolkit.

This module provides centralized configuration management with environment variable
support using Pydantic Settings. Per-analysis choices (columns, roles, engine, seed)
live in the run configuration, see ``bsca.models.run_config``.
"""

import logging
from typing import Literal

from pydantic import Field, computed_field
from pydantic_settings import BaseSettings, SettingsConfigDict


class BscaSettings(BaseSettings):
    """Process-wide defaults.

    All settings can be overridden by environment variables with the prefix BSCA_.
    For example, BSCA_ENUMERATION_CAP will override enumeration_cap.
    """

    # Model scoring
    ebic_gamma: float = Field(default=1.0, ge=0.0, description="EBIC constant")
    enumeration_cap: int = Field(
        default=4096, ge=1, description="Largest model space explored by enumeration"
    )
    gibbs_iters: int = 20000
    gibbs_burnin: int = 1000

    # GLM fitting
    irls_max_iter: int = 100
    irls_tol: float = 1e-8
    separation_threshold: float = Field(
        default=30.0, description="Coefficient max-norm treated as separation"
    )

    # Posterior summaries
    test_threshold: float = Field(default=0.95, gt=0.0, lt=1.0)
    posterior_draws: int = Field(default=10000, ge=100)
    interval_level: float = Field(default=0.95, gt=0.0, lt=1.0)
    point_mass_flag: float = 0.025  # p_inc below this reports the interval as [0, 0]
    density_bins: int = 60
    top_models: int = 100

    # Specification curve baseline
    sca_method: Literal["bootstrap", "permutation"] = "bootstrap"
    sca_draws: int = Field(default=500, ge=100)

    # Service settings
    log_level: str = Field("INFO", description="Logging level")
    workers: int = Field(default=1, ge=1, description="Thread workers for parallel fits")

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="BSCA_",
        extra="ignore",
    )

    @computed_field
    @property
    def log_level_value(self) -> int:
        """Get the numeric logging level, falling back to INFO for unknown names."""
        level = logging.getLevelName(self.log_level.upper())
        return level if isinstance(level, int) else logging.INFO


# Create a singleton instance of the settings
settings = BscaSettings()
