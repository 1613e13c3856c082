"""Tests for the binary checkpoint format."""

import json
import struct

import numpy as np
import pytest

from tabgen.errors import (
    CheckpointError,
    IoError,
    MagicError,
    SchemaMismatchError,
    TruncatedCheckpointError,
    VersionError,
)
from tabgen.training.checkpoint import (
    MAGIC,
    checkpoint_bytes,
    load_checkpoint,
    parse_checkpoint,
    save_checkpoint,
)


@pytest.fixture(scope="module")
def payload(trained):
    """Serialized bytes of the session's trained checkpoint."""
    checkpoint, _ = trained
    return checkpoint_bytes(checkpoint)


def test_header(payload):
    """Test magic bytes and version come first."""
    assert payload[:4] == MAGIC
    assert struct.unpack("<I", payload[4:8])[0] == 1


def test_roundtrip_weights(trained, tmp_path):
    """Test saved weights reload within float32 precision."""
    checkpoint, _ = trained
    path = save_checkpoint(checkpoint, tmp_path / "model.scvz")
    loaded = load_checkpoint(path, expected_schema_hash=checkpoint.schema_hash)
    assert loaded.model.params.keys() == checkpoint.model.params.keys()
    for name, param in checkpoint.model.params.items():
        np.testing.assert_allclose(loaded.model[name].value, param.value, atol=1e-6)
    assert loaded.model.frozen
    assert loaded.config == checkpoint.config
    assert loaded.schema.content_hash == checkpoint.schema_hash
    assert loaded.best_epoch == checkpoint.best_epoch


def test_roundtrip_banks(trained, payload):
    """Test bank means, log-variances and ids survive serialisation."""
    checkpoint, _ = trained
    loaded = parse_checkpoint(payload)
    for condition, bank in checkpoint.banks.items():
        np.testing.assert_allclose(loaded.banks[condition].vectors, bank.vectors, atol=1e-6)
        np.testing.assert_allclose(loaded.banks[condition].logvars, bank.logvars, atol=1e-6)
        np.testing.assert_array_equal(loaded.banks[condition].ids, bank.ids)


def test_reserialisation_is_stable(payload):
    """Test a loaded checkpoint serializes to the same bytes."""
    assert checkpoint_bytes(parse_checkpoint(payload)) == payload


def test_bad_magic(payload):
    """Test wrong leading bytes raise MagicError."""
    with pytest.raises(MagicError):
        parse_checkpoint(b"XXXX" + payload[4:])


def test_bad_version(payload):
    """Test an unknown version raises VersionError."""
    with pytest.raises(VersionError):
        parse_checkpoint(payload[:4] + struct.pack("<I", 2) + payload[8:])


def test_schema_mismatch(payload):
    """Test a different expected schema hash raises SchemaMismatchError."""
    with pytest.raises(SchemaMismatchError):
        parse_checkpoint(payload, expected_schema_hash="0" * 64)


def test_truncated(payload):
    """Test a cut-off file raises TruncatedCheckpointError."""
    with pytest.raises(TruncatedCheckpointError):
        parse_checkpoint(payload[:-10])
    with pytest.raises(TruncatedCheckpointError):
        parse_checkpoint(payload[:6])


def _with_metadata(payload, edit):
    meta_len = struct.unpack("<Q", payload[8:16])[0]
    meta = json.loads(payload[16:16 + meta_len])
    edit(meta)
    encoded = json.dumps(meta, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return payload[:8] + struct.pack("<Q", len(encoded)) + encoded + payload[16 + meta_len:]


@pytest.mark.parametrize("key", ["dims", "config", "banks", "blobs", "schema_hash"])
def test_missing_metadata_key(payload, key):
    """Test metadata without a required key raises the checkpoint error."""
    with pytest.raises(CheckpointError, match=key):
        parse_checkpoint(_with_metadata(payload, lambda meta: meta.pop(key)))


def test_malformed_bank_entry(payload):
    """Test a bank entry without ids raises the checkpoint error, not KeyError."""
    def drop_ids(meta):
        meta["banks"]["0"].pop("ids")

    with pytest.raises(CheckpointError, match="ids"):
        parse_checkpoint(_with_metadata(payload, drop_ids))


def test_errors_share_io_exit_code():
    """Test every checkpoint error is an IoError with exit code 5."""
    for cls in (MagicError, VersionError, SchemaMismatchError, TruncatedCheckpointError):
        assert issubclass(cls, CheckpointError)
        assert cls.exit_code == 5


def test_missing_file(tmp_path):
    """Test loading an absent file raises IoError."""
    with pytest.raises(IoError):
        load_checkpoint(tmp_path / "absent.scvz")


def test_describe(trained):
    """Test the weight-free summary."""
    checkpoint, _ = trained
    info = checkpoint.describe()
    assert info["variant"] == "SCCVAE"
    assert info["attributes"] == 7
    assert info["latent_dim"] == 3
    assert info["bank_sizes"] == {"0": 20, "1": 20}
