"""Tests for conditional generation."""

import json

import numpy as np
import pytest
from pydantic import ValidationError

from tabgen.errors import BankError, ContractError
from tabgen.model.cvae import CvaeModel, ModelDims
from tabgen.sampling.bank import LatentBank
from tabgen.sampling.generate import (
    SHARD_SIZE,
    GenerationRequest,
    decode_records,
    generate,
    prior_sample,
    write_synthetic,
)


def _generate(trained, **request):
    checkpoint, _ = trained
    return generate(checkpoint.model, checkpoint.banks, GenerationRequest(**request),
                    checkpoint.schema)


def test_single_record(trained):
    """Test count 1 yields one row with the requested label."""
    out = _generate(trained, condition="risk", count=1)
    assert len(out) == 1
    assert out.conditions.tolist() == [1]


def test_rows_are_valid(trained):
    """Test every generated index is within its attribute's range."""
    out = _generate(trained, condition="non-risk", count=200, seed=3)
    assert set(out.conditions.tolist()) == {0}
    for j, card in enumerate(out.schema.cardinalities):
        assert out.rows[:, j].max() < card


def test_same_seed_same_output(trained):
    """Test generation is a function of the seed."""
    a = _generate(trained, condition="risk", count=50, seed=4)
    b = _generate(trained, condition="risk", count=50, seed=4)
    c = _generate(trained, condition="risk", count=50, seed=5)
    np.testing.assert_array_equal(a.rows, b.rows)
    assert not np.array_equal(a.rows, c.rows)


def test_threads_do_not_change_output(trained):
    """Test sharded generation is independent of the worker count."""
    checkpoint, _ = trained
    request = GenerationRequest(condition="non-risk", count=2 * SHARD_SIZE + 7, seed=1)
    one = generate(checkpoint.model, checkpoint.banks, request, checkpoint.schema, threads=1)
    four = generate(checkpoint.model, checkpoint.banks, request, checkpoint.schema, threads=4)
    np.testing.assert_array_equal(one.rows, four.rows)
    assert len(one) == 2 * SHARD_SIZE + 7


def test_degenerate_bank_argmax(trained):
    """Test a bank of identical vectors decodes to identical records under argmax."""
    checkpoint, _ = trained
    bank = LatentBank(1, np.tile([[0.3, -0.2, 0.1]], (8, 1)), np.arange(8))
    out = generate(checkpoint.model, {1: bank},
                   GenerationRequest(condition="risk", count=30, decode="argmax"),
                   checkpoint.schema)
    assert np.all(out.rows == out.rows[0])


def test_bank_must_exceed_k(trained):
    """Test a bank not larger than k raises BankError."""
    checkpoint, _ = trained
    small = {0: LatentBank(0, np.zeros((5, 3)), np.arange(5))}
    with pytest.raises(BankError):
        generate(checkpoint.model, small, GenerationRequest(condition="non-risk", count=3, k=5),
                 checkpoint.schema)
    with pytest.raises(BankError):
        generate(checkpoint.model, small, GenerationRequest(condition="risk", count=3),
                 checkpoint.schema)


def test_request_validation():
    """Test count and condition are validated."""
    with pytest.raises(ValidationError):
        GenerationRequest(condition="risk", count=0)
    with pytest.raises(ValidationError):
        GenerationRequest(condition="maybe", count=1)
    assert GenerationRequest(condition="risk", count=1).condition_index == 1


def test_prior_and_sampled_bank(trained):
    """Test the prior sampler and stochastic bank source."""
    checkpoint, _ = trained
    prior = prior_sample(checkpoint.model, "risk", 20, seed=0, schema=checkpoint.schema)
    assert len(prior) == 20 and set(prior.conditions.tolist()) == {1}
    via_request = _generate(trained, condition="risk", count=20, sampler="prior")
    np.testing.assert_array_equal(prior.rows, via_request.rows)
    sampled = _generate(trained, condition="risk", count=20, latent_source="sample")
    assert len(sampled) == 20


def test_sample_decoding_follows_softmax():
    """Test sampled categories match uniform softmax frequencies for a zero model."""
    dims = ModelDims(cardinalities=[2, 4], embedding_dim=2, latent_dim=2)
    model = CvaeModel.initialize(dims)
    for p in model.parameters():
        p.value = np.zeros_like(p.value)
    rows = decode_records(model, np.zeros((8000, 2)), 0, "sample", np.random.default_rng(0))
    freq_a = np.bincount(rows[:, 0], minlength=2) / 8000
    freq_b = np.bincount(rows[:, 1], minlength=4) / 8000
    np.testing.assert_allclose(freq_a, 0.5, atol=0.03)
    np.testing.assert_allclose(freq_b, 0.25, atol=0.03)
    with pytest.raises(ContractError):
        decode_records(model, np.zeros((1, 2)), 0, "sample")


def test_write_synthetic(tmp_path, trained):
    """Test the CSV and provenance sidecar."""
    out = _generate(trained, condition="risk", count=5)
    paths = write_synthetic(out, tmp_path / "synth.csv", {"seed": 0})
    assert paths["provenance"].name == "synth.csv.provenance.json"
    assert json.loads(paths["provenance"].read_text()) == {"seed": 0}
    assert paths["data"].read_text().splitlines()[0].split(",")[0] == "age"
