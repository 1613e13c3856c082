"""Tests for the training configuration."""

import json

import pytest
from pydantic import ValidationError

from tabgen.errors import ConfigError, IoError
from tabgen.model.losses import ScheduleConfig
from tabgen.training.config import TrainingConfig, load_training_config


def test_defaults():
    """Test the default hyperparameters."""
    cfg = TrainingConfig()
    assert cfg.variant == "SCCVAE"
    assert (cfg.embedding_dim, cfg.latent_dim) == (32, 64)
    assert cfg.tau == 0.5 and cfg.alpha == 0.1 and cfg.lambda_ == 1e-3
    assert (cfg.epochs, cfg.patience, cfg.batch_size) == (200, 10, 64)
    assert cfg.learning_rate == 1e-3
    assert cfg.beta_schedule.cycles == 4 and cfg.beta_schedule.ratio == 0.9


def test_scvae_drops_contrastive():
    """Test SCVAE forces alpha to zero."""
    cfg = TrainingConfig(variant="SCVAE", alpha=0.5)
    assert cfg.alpha == 0.0
    assert not cfg.contrastive
    assert cfg.alpha_at(3) == 0.0


def test_ccvae_drops_sparsity():
    """Test CCVAE forces lambda to zero."""
    cfg = TrainingConfig(variant="CCVAE")
    assert cfg.lambda_ == 0.0
    assert cfg.contrastive


def test_calpha_schedules_alpha():
    """Test SCCVAE-Calpha ramps alpha up to its configured value."""
    cfg = TrainingConfig(variant="SCCVAE-Calpha", alpha=0.2, epochs=20)
    assert cfg.alpha_schedule.max_value == 0.2
    assert cfg.alpha_schedule.total_epochs == 20
    assert cfg.alpha_at(0) == 0.0
    assert cfg.alpha_at(4) == pytest.approx(0.2 * 4 / 4.5)
    assert cfg.alpha_at(5) == 0.0


def test_schedules_stretch_to_epochs():
    """Test the beta schedule follows the epoch count."""
    cfg = TrainingConfig(epochs=40, beta_schedule=ScheduleConfig(cycles=2))
    assert cfg.beta_schedule.total_epochs == 40
    assert cfg.beta_schedule.period == 20
    assert cfg.beta_at(0) == 0.0
    assert cfg.beta_at(19) == 1.0


def test_too_few_epochs_for_cycles():
    """Test fewer epochs than schedule cycles is rejected."""
    with pytest.raises(ValidationError):
        TrainingConfig(epochs=3)
    TrainingConfig(epochs=3, beta_schedule=ScheduleConfig(cycles=1))


def test_field_bounds():
    """Test batch size and variant validation."""
    with pytest.raises(ValidationError):
        TrainingConfig(batch_size=1)
    with pytest.raises(ValidationError):
        TrainingConfig(variant="VAE")


def test_json_uses_lambda_alias():
    """Test serialisation uses the short lambda key and reloads."""
    cfg = TrainingConfig(lambda_=0.01)
    payload = json.loads(cfg.to_json())
    assert payload["lambda"] == 0.01
    assert TrainingConfig.model_validate(payload).lambda_ == 0.01


def test_load_with_overrides(tmp_path):
    """Test file values with command-line overrides."""
    path = tmp_path / "train.json"
    path.write_text(json.dumps({"variant": "CCVAE", "epochs": 12, "lambda": 0.5, "seed": 1}))
    cfg = load_training_config(path, seed=9, epochs=None)
    assert cfg.variant == "CCVAE"
    assert cfg.epochs == 12
    assert cfg.seed == 9
    assert cfg.lambda_ == 0.0


def test_load_errors(tmp_path):
    """Test missing, malformed and invalid config files."""
    with pytest.raises(IoError):
        load_training_config(tmp_path / "absent.json")
    broken = tmp_path / "broken.json"
    broken.write_text("{")
    with pytest.raises(ConfigError):
        load_training_config(broken)
    invalid = tmp_path / "invalid.json"
    invalid.write_text(json.dumps({"epochs": 0}))
    with pytest.raises(ConfigError):
        load_training_config(invalid)


def test_calpha_trace_over_full_run():
    """Test alpha follows the four-cycle table across 200 epochs."""
    cfg = TrainingConfig(variant="SCCVAE-Calpha", alpha=1.0)
    trace = [cfg.alpha_at(e) for e in range(200)]
    assert [trace[e] for e in (0, 50, 100, 150)] == [0.0] * 4
    assert all(trace[c * 50 + i] == 1.0 for c in range(4) for i in range(45, 50))
    assert trace[22] == pytest.approx(22 / 45, abs=1e-12)
