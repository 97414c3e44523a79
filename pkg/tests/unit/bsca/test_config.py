"""Tests for the configuration management system."""

import logging
import os
import tempfile
from pathlib import Path
from unittest import mock

import pytest
from pydantic import ValidationError

from bsca.config import BscaSettings


def test_default_settings():
    """Test that default settings are loaded correctly."""
    settings = BscaSettings()
    assert settings.ebic_gamma == 1.0
    assert settings.enumeration_cap == 4096
    assert settings.gibbs_iters == 20000
    assert settings.gibbs_burnin == 1000
    assert settings.test_threshold == 0.95
    assert settings.top_models == 100
    assert settings.sca_method == "bootstrap"
    assert settings.log_level == "INFO"
    assert settings.workers == 1


def test_env_variable_override():
    """Test that environment variables properly override default settings."""
    with mock.patch.dict(os.environ, {
        "BSCA_EBIC_GAMMA": "0.5",
        "BSCA_ENUMERATION_CAP": "1024",
        "BSCA_LOG_LEVEL": "DEBUG",
    }):
        settings = BscaSettings()
        assert settings.ebic_gamma == 0.5
        assert settings.enumeration_cap == 1024
        assert settings.log_level == "DEBUG"
        # This one was not overridden, so should still be default
        assert settings.test_threshold == 0.95


def test_invalid_threshold_rejected():
    """Test that a test threshold outside (0, 1) is rejected."""
    with mock.patch.dict(os.environ, {"BSCA_TEST_THRESHOLD": "1.5"}):
        with pytest.raises(ValidationError):
            BscaSettings()


def test_log_level_value():
    """Test that the numeric log level falls back to INFO for unknown names."""
    assert BscaSettings(log_level="debug").log_level_value == logging.DEBUG
    assert BscaSettings(log_level="verbose").log_level_value == logging.INFO


def test_env_file_loading():
    """Test loading configuration from .env file."""
    with tempfile.TemporaryDirectory() as temp_dir:
        env_file_path = Path(temp_dir) / ".env"
        with open(env_file_path, "w") as env_file:
            env_file.write("BSCA_POSTERIOR_DRAWS=2000\n")
            env_file.write("BSCA_SCA_METHOD=permutation\n")

        with mock.patch("bsca.config.BscaSettings.model_config", {
                "env_file": str(env_file_path),
                "env_file_encoding": "utf-8",
                "env_prefix": "BSCA_",
                "extra": "ignore"
            }):
            settings = BscaSettings()

            assert settings.posterior_draws == 2000
            assert settings.sca_method == "permutation"
            # Values not in .env file should still have defaults
            assert settings.interval_level == 0.95
