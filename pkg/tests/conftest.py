"""Pytest configuration and shared fixtures."""

import numpy as np
import pytest
from unittest.mock import AsyncMock, MagicMock

from tabgen.benchmark import BenchConfig, generate_benchmark
from tabgen.config import TabgenConfig
from tabgen.data.dataset import Dataset
from tabgen.data.pipeline import PrepareConfig, prepare
from tabgen.data.schema import AttributeSpec, Schema
from tabgen.model.losses import ScheduleConfig
from tabgen.registry import get_model_registry
from tabgen.training.config import TrainingConfig
from tabgen.training.trainer import train


def make_toy_schema() -> Schema:
    """Seven model attributes plus the condition; two ergometry pairs."""
    return Schema(attributes=[
        AttributeSpec(name="age", kind="continuous-binned",
                      categories=["<50", "[50,65)", ">=65", "missing"],
                      edges=[50.0, 65.0], midpoints=[45.0, 57.5, 70.0], missing_index=3),
        AttributeSpec(name="sex", kind="binary", categories=["F", "M", "missing"], missing_index=2),
        AttributeSpec(name="noise_1", kind="categorical", categories=["c0", "c1", "c2"]),
        AttributeSpec(name="mets_start", kind="continuous-binned",
                      categories=["<4.5", "[4.5,5.5)", ">=5.5", "missing"],
                      edges=[4.5, 5.5], midpoints=[4.0, 5.0, 6.0], missing_index=3),
        AttributeSpec(name="mets_end", kind="continuous-binned", role="generation-only",
                      categories=["<4.5", "[4.5,5.5)", ">=5.5", "missing"],
                      edges=[4.5, 5.5], midpoints=[4.0, 5.0, 6.0], missing_index=3),
        AttributeSpec(name="watts_start", kind="continuous-binned",
                      categories=["<105", ">=105", "missing"],
                      edges=[105.0], midpoints=[100.0, 110.0], missing_index=2),
        AttributeSpec(name="watts_end", kind="continuous-binned", role="generation-only",
                      categories=["<105", ">=105", "missing"],
                      edges=[105.0], midpoints=[100.0, 110.0], missing_index=2),
        AttributeSpec(name="risk", kind="binary", role="condition", categories=["non-risk", "risk"]),
    ])


def make_toy_dataset(schema: Schema, n: int = 40, seed: int = 0) -> Dataset:
    """Random valid rows, classes alternating so both are equally represented."""
    generator = np.random.default_rng(seed)
    cards = schema.cardinalities
    rows = np.stack([generator.integers(0, c, size=n) for c in cards], axis=1)
    conditions = np.arange(n) % 2
    return Dataset(schema, rows, conditions)


def tiny_training_config(**overrides) -> TrainingConfig:
    """A model small and short enough to train inside a unit test."""
    values = dict(embedding_dim=4, latent_dim=3, epochs=4, batch_size=16, patience=10,
                  beta_schedule=ScheduleConfig(cycles=2), seed=7)
    values.update(overrides)
    return TrainingConfig(**values)


@pytest.fixture
def tabgen_config():
    """Provide test configuration."""
    return TabgenConfig()


@pytest.fixture
def mock_context():
    """Provide mock FastMCP Context."""
    ctx = MagicMock()
    ctx.session_id = "test-session-123"
    ctx.info = AsyncMock()
    ctx.debug = AsyncMock()
    ctx.warning = AsyncMock()
    ctx.error = AsyncMock()
    ctx.report_progress = AsyncMock()
    return ctx


@pytest.fixture(scope="session")
def toy_schema():
    """Prepared schema with binned, binary, categorical and ergometry attributes."""
    return make_toy_schema()


@pytest.fixture(scope="session")
def toy_dataset(toy_schema):
    """40 encoded records, 20 per class."""
    return make_toy_dataset(toy_schema)


@pytest.fixture(scope="session")
def trained(toy_dataset):
    """(checkpoint, history) of a tiny SCCVAE trained on the toy dataset."""
    return train(toy_dataset, tiny_training_config())


@pytest.fixture(scope="session")
def bench_frame():
    """Small benchmark corpus: (raw frame, raw schema)."""
    return generate_benchmark(BenchConfig(patients=200, noise=3, seed=3))


@pytest.fixture(scope="session")
def bench_prepared(bench_frame):
    """The small benchmark corpus run through the preparation pipeline."""
    frame, raw_schema = bench_frame
    return prepare(frame, raw_schema, PrepareConfig())


@pytest.fixture(autouse=True)
def clear_model_registry():
    """Drop cached checkpoints after each test."""
    yield
    get_model_registry().clear()
