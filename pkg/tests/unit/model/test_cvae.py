"""Tests for the conditional VAE."""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from tabgen.errors import EncodingError, ShapeError
from tabgen.model.cvae import (
    CvaeModel,
    LatentDistribution,
    ModelDims,
    decode,
    decode_latents,
    encode,
    forward,
    reparameterize,
)
from tabgen.numerics import Graph


@pytest.fixture
def model():
    """Small model over three attributes."""
    dims = ModelDims(cardinalities=[3, 2, 4], embedding_dim=4, latent_dim=3)
    return CvaeModel.initialize(dims, ["a", "b", "c"], np.random.default_rng(0))


def _zero(model):
    for p in model.parameters():
        p.value = np.zeros_like(p.value)


def test_dims_widths():
    """Test hidden widths halve and quarter the concatenated embedding width."""
    dims = ModelDims(cardinalities=[3, 2, 4], embedding_dim=5, latent_dim=6)
    assert dims.encoder_widths == [20, 10, 5]
    assert dims.decoder_widths == [11, 5, 10]
    odd = ModelDims(cardinalities=[2, 2], embedding_dim=3, latent_dim=2)
    assert odd.encoder_widths == [9, 5, 3]


def test_dims_reject_single_category():
    """Test attributes need at least two categories."""
    with pytest.raises(ValidationError):
        ModelDims(cardinalities=[1, 3])
    with pytest.raises(ValidationError):
        ModelDims(cardinalities=[])


def test_parameter_names_and_shapes(model):
    """Test embedding, encoder, decoder and head parameters exist with matching shapes."""
    assert model["emb.a"].shape == (3, 4)
    assert model["emb.condition"].shape == (2, 4)
    assert model["enc.0.w"].shape == (16, 8)
    assert model["enc.mu.w"].shape == (4, 3)
    assert model["enc.logvar.b"].shape == (1, 3)
    assert model["dec.0.w"].shape == (7, 4)
    assert model["head.c.w"].shape == (8, 4)
    assert all(not p.name.endswith(".b") for p in model.weight_parameters())


def test_initialization_deterministic():
    """Test the same generator seed gives the same weights."""
    dims = ModelDims(cardinalities=[3, 3], embedding_dim=2, latent_dim=2)
    a = CvaeModel.initialize(dims, generator=np.random.default_rng(5)).state_dict()
    b = CvaeModel.initialize(dims, generator=np.random.default_rng(5)).state_dict()
    assert a.keys() == b.keys()
    for name in a:
        np.testing.assert_array_equal(a[name], b[name])


def test_zero_weights_give_bias(model):
    """Test all-zero weights map every row to the head biases."""
    _zero(model)
    model["enc.mu.b"].value = np.array([[0.1, 0.2, 0.3]])
    model["enc.logvar.b"].value = np.array([[-1.0, 0.0, 1.0]])
    dist = encode(model, [[0, 1, 2], [2, 0, 3]], [0, 1])
    np.testing.assert_allclose(dist.mu.value, [[0.1, 0.2, 0.3]] * 2)
    np.testing.assert_allclose(dist.logvar.value, [[-1.0, 0.0, 1.0]] * 2)


def test_zero_weights_uniform_logits(model):
    """Test all-zero weights give uniform per-attribute softmax."""
    _zero(model)
    logits = decode_latents(model, np.random.default_rng(1).normal(size=(4, 3)), [0, 1, 0, 1])
    for array in logits:
        assert np.all(array == 0.0)


def test_identical_rows_identical_posteriors(model):
    """Test equal inputs produce equal posterior rows."""
    dist = encode(model, [[1, 0, 2], [1, 0, 2]], [1, 1])
    np.testing.assert_array_equal(dist.mu.value[0], dist.mu.value[1])
    np.testing.assert_array_equal(dist.logvar.value[0], dist.logvar.value[1])


def test_logvar_clamped(model):
    """Test log-variance stays within [-10, 10]."""
    model["enc.logvar.b"].value = np.full((1, 3), 50.0)
    dist = encode(model, [[0, 0, 0]], [0])
    assert np.all(dist.logvar.value == 10.0)


def test_encode_rejects_bad_indices(model):
    """Test out-of-range indices and bad shapes."""
    with pytest.raises(EncodingError):
        encode(model, [[3, 0, 0]], [0])
    with pytest.raises(EncodingError):
        encode(model, [[0, 0, 0]], [2])
    with pytest.raises(ShapeError):
        encode(model, [[0, 0]], [0])


def test_reparameterize_examples():
    """Test z = mu + sigma * eps on hand-computed values."""
    g = Graph()
    dist = LatentDistribution(mu=g.constant([[0.0, 1.0, 5.0]]),
                              logvar=g.constant([[0.0, 2.0 * math.log(3.0), 1.0]]))
    z = reparameterize(dist, [[1.0, 2.0, 0.0]])
    np.testing.assert_allclose(z.value, [[1.0, 7.0, 5.0]])
    with pytest.raises(ShapeError):
        reparameterize(dist, [[1.0]])


def test_reparameterize_is_affine_in_eps():
    """Test z(eps) - mu scales linearly with eps."""
    g = Graph()
    gen = np.random.default_rng(2)
    dist = LatentDistribution(mu=g.constant(gen.normal(size=(5, 3))),
                              logvar=g.constant(gen.normal(size=(5, 3))))
    eps = gen.normal(size=(5, 3))
    z1 = reparameterize(dist, eps).value - dist.mu.value
    z2 = reparameterize(dist, 2.0 * eps).value - dist.mu.value
    np.testing.assert_allclose(z2, 2.0 * z1)


def test_decode_deterministic(model):
    """Test the same (z, condition) gives the same logits."""
    z = np.random.default_rng(3).normal(size=(2, 3))
    first = decode_latents(model, z, [0, 1])
    second = decode_latents(model, z, [0, 1])
    for a, b in zip(first, second):
        np.testing.assert_array_equal(a, b)
    assert [a.shape for a in first] == [(2, 3), (2, 2), (2, 4)]


def test_decode_shape_mismatch(model):
    """Test a latent of the wrong width is rejected."""
    g = Graph()
    with pytest.raises(ShapeError):
        decode(model, g.constant(np.zeros((2, 5))), [0, 1])


def test_forward_keeps_latents(model):
    """Test forward returns z and the positive view when requested."""
    eps = np.zeros((2, 3))
    out = forward(model, [[0, 1, 2], [1, 0, 3]], [0, 1], eps, eps_pos=np.ones((2, 3)))
    np.testing.assert_allclose(out.z.value, out.dist.mu.value)
    assert out.z_pos is not None
    assert out.z.graph is out.graph
    assert len(out.logits) == 3


def test_state_dict_roundtrip(model):
    """Test loading a state dict restores values and checks shapes."""
    state = model.state_dict()
    model["emb.a"].value += 1.0
    model.load_state_dict(state)
    np.testing.assert_array_equal(model["emb.a"].value, state["emb.a"])
    with pytest.raises(ShapeError):
        model.load_state_dict({"emb.a": np.zeros((1, 1))})
