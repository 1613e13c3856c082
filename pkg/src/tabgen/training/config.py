"""Training configuration and its variant rules."""

import json
from pathlib import Path
from typing import Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from tabgen.errors import ConfigError, IoError
from tabgen.model.losses import ScheduleConfig, cyclic_schedule

Variant = Literal["SCCVAE", "SCVAE", "CCVAE", "SCCVAE-Calpha"]
Monitor = Literal["train", "validation"]


class TrainingConfig(BaseModel):
    """
    Hyperparameters of one training run.

    SCVAE drops the contrastive term (alpha = 0), CCVAE drops the sparsity
    term (lambda = 0) and SCCVAE-Calpha drives alpha with ``alpha_schedule``.
    """

    model_config = ConfigDict(populate_by_name=True)

    variant: Variant = "SCCVAE"
    embedding_dim: int = Field(default=32, ge=1)
    latent_dim: int = Field(default=64, ge=1)
    tau: float = Field(default=0.5, gt=0.0)
    alpha: float = Field(default=0.1, ge=0.0)
    lambda_: float = Field(default=1e-3, ge=0.0, alias="lambda")
    beta_schedule: ScheduleConfig = Field(default_factory=ScheduleConfig)
    alpha_schedule: Optional[ScheduleConfig] = None
    epochs: int = Field(default=200, ge=1)
    patience: int = Field(default=10, ge=1)
    batch_size: int = Field(default=64, ge=2)
    learning_rate: float = Field(default=1e-3, gt=0.0)
    seed: int = 0
    l1_on_weights: bool = False
    monitor: Monitor = "train"

    @model_validator(mode="after")
    def _apply_variant(self) -> "TrainingConfig":
        if self.variant == "SCVAE":
            self.alpha = 0.0
        elif self.variant == "CCVAE":
            self.lambda_ = 0.0
        elif self.variant == "SCCVAE-Calpha" and self.alpha_schedule is None:
            self.alpha_schedule = ScheduleConfig(max_value=self.alpha)

        self.beta_schedule = _fit_schedule(self.beta_schedule, self.epochs, "beta_schedule")
        if self.alpha_schedule is not None:
            self.alpha_schedule = _fit_schedule(self.alpha_schedule, self.epochs, "alpha_schedule")
        return self

    @property
    def contrastive(self) -> bool:
        return self.variant != "SCVAE"

    def alpha_at(self, epoch: int) -> float:
        if not self.contrastive:
            return 0.0
        if self.variant == "SCCVAE-Calpha":
            return cyclic_schedule(epoch, self.alpha_schedule)
        return self.alpha

    def beta_at(self, epoch: int) -> float:
        return cyclic_schedule(epoch, self.beta_schedule)

    def to_json(self) -> str:
        return json.dumps(self.model_dump(by_alias=True), indent=2, sort_keys=True)


def _fit_schedule(schedule: ScheduleConfig, epochs: int, field: str) -> ScheduleConfig:
    """Stretch a schedule over the configured number of epochs."""
    if epochs < schedule.cycles:
        raise ValueError(f"{field}: epochs ({epochs}) must be at least cycles ({schedule.cycles})")
    if schedule.total_epochs == epochs:
        return schedule
    return schedule.model_copy(update={"total_epochs": epochs})


def load_training_config(path: Union[str, Path], **overrides) -> TrainingConfig:
    """
    Read a JSON training config, applying keyword overrides (e.g. ``seed``).

    Raises:
        IoError: If the file cannot be read
        ConfigError: If the JSON is malformed or fails validation
    """
    try:
        payload = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise IoError(f"Training config not found: {path}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"Invalid JSON in {path}: {e}")
    payload.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return TrainingConfig.model_validate(payload)
    except ValidationError as e:
        raise ConfigError(f"Invalid training config {path}: {e}")
