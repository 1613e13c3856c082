"""Optimisation, checkpoints and the training loop."""

from tabgen.training.checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from tabgen.training.config import TrainingConfig, load_training_config
from tabgen.training.optim import Adam, AdamState, adam_step
from tabgen.training.trainer import LossGraph, TrainingHistory, build_loss, evaluate_loss, train

__all__ = [
    "Checkpoint",
    "load_checkpoint",
    "save_checkpoint",
    "TrainingConfig",
    "load_training_config",
    "Adam",
    "AdamState",
    "adam_step",
    "LossGraph",
    "TrainingHistory",
    "build_loss",
    "evaluate_loss",
    "train",
]
