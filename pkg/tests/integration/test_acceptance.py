"""Desk-scale acceptance runs on the full benchmark corpus.

These train the default SCCVAE for up to 200 epochs and run the five-seed
augmentation grid, so they are marked slow.
"""

import numpy as np
import pytest

from tabgen.benchmark import BenchConfig, generate_benchmark
from tabgen.data.pipeline import PrepareConfig, prepare
from tabgen.evaluation.experiment import ExperimentConfig, augmentation_experiment
from tabgen.model.cvae import decode_latents
from tabgen.training.checkpoint import checkpoint_bytes, parse_checkpoint
from tabgen.training.config import TrainingConfig
from tabgen.training.trainer import train

pytestmark = pytest.mark.slow

CLASSIFIERS = ["logreg", "mlp", "random_forest"]


@pytest.fixture(scope="module")
def prepared():
    frame, raw_schema = generate_benchmark(BenchConfig(patients=811, seed=42))
    return prepare(frame, raw_schema, PrepareConfig())


@pytest.fixture(scope="module")
def checkpoint(prepared):
    config = TrainingConfig(seed=42)
    trained, _ = train(prepared.train, config, validation=prepared.validation)
    return trained


@pytest.fixture(scope="module")
def report(prepared, checkpoint):
    config = ExperimentConfig(factors=[2], classifiers=CLASSIFIERS, seeds=5, seed=42,
                              consistency_count=500)
    return augmentation_experiment(prepared, {"SCCVAE": checkpoint}, config)


def test_generated_classes_are_consistent(report):
    """Test 500 generated records per class satisfy their class definition."""
    for label, accuracy in report.consistency["SCCVAE"].items():
        assert accuracy >= 0.95, label


def test_augmentation_does_not_hurt(report):
    """Test doubling the training set helps most classifiers and hurts none much."""
    deltas = {kind: report.median_delta("SCCVAE", 2, kind) for kind in CLASSIFIERS}
    assert sum(d >= 0.0 for d in deltas.values()) >= 2, deltas
    assert min(deltas.values()) >= -0.05, deltas


def test_checkpoint_round_trip(checkpoint, prepared):
    """Test a saved checkpoint decodes to the same logits within 1e-6."""
    restored = parse_checkpoint(checkpoint_bytes(checkpoint), prepared.schema.content_hash)
    gen = np.random.default_rng(0)
    z = gen.standard_normal((64, checkpoint.model.dims.latent_dim))
    conds = gen.integers(0, 2, 64)
    for before, after in zip(decode_latents(checkpoint.model, z, conds),
                             decode_latents(restored.model, z, conds)):
        np.testing.assert_allclose(after, before, atol=1e-6)
