"""Tests for configuration management."""

import pytest
from pydantic import ValidationError


def test_default_config_creation(tabgen_config):
    """Test creating default configuration."""
    assert tabgen_config.server.name == "tabgen"
    assert tabgen_config.logging.log_level == "INFO"
    assert tabgen_config.server.mask_error_details is False
    assert tabgen_config.runtime.threads == 1


def test_config_from_env(monkeypatch):
    """Test loading config from environment."""
    from tabgen.config import load_config_from_env

    monkeypatch.setenv("TABGEN_LOG_LEVEL", "debug")
    monkeypatch.setenv("TABGEN_MASK_ERRORS", "true")
    monkeypatch.setenv("TABGEN_THREADS", "4")

    config = load_config_from_env()

    assert config.logging.log_level == "DEBUG"
    assert config.server.mask_error_details is True
    assert config.runtime.threads == 4


def test_invalid_env(monkeypatch):
    """Test unknown levels and non-positive thread counts are rejected."""
    from tabgen.config import load_config_from_env

    monkeypatch.setenv("TABGEN_LOG_LEVEL", "LOUD")
    with pytest.raises(ValidationError):
        load_config_from_env()

    monkeypatch.setenv("TABGEN_LOG_LEVEL", "INFO")
    monkeypatch.setenv("TABGEN_THREADS", "0")
    with pytest.raises(ValidationError):
        load_config_from_env()
