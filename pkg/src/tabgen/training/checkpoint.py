"""Versioned binary checkpoint.

Layout (integers little-endian)::

    b"SCVZ" | u32 version | u64 metadata length | metadata (UTF-8 JSON)
    then per blob: u32 name length | name | u64 byte length | float32 payload

The metadata holds the training config, model dimensions, attribute names,
the prepared schema and its hash, training summary fields, and the shape of
every blob in write order.
"""

import json
import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Union

import numpy as np

from tabgen.data.schema import Schema
from tabgen.errors import (
    CheckpointError,
    IoError,
    MagicError,
    SchemaMismatchError,
    TruncatedCheckpointError,
    VersionError,
)
from tabgen.model.cvae import CvaeModel, ModelDims
from tabgen.numerics import Parameter
from tabgen.sampling.bank import LatentBank
from tabgen.training.config import TrainingConfig

logger = logging.getLogger(__name__)

MAGIC = b"SCVZ"
FORMAT_VERSION = 1
METADATA_KEYS = frozenset({
    "config", "dims", "attribute_names", "schema", "schema_hash", "final_epoch",
    "best_epoch", "best_loss", "banks", "blobs",
})


@dataclass
class Checkpoint:
    """A trained model together with everything generation needs."""

    model: CvaeModel
    config: TrainingConfig
    schema: Schema
    banks: Dict[int, LatentBank] = field(default_factory=dict)
    final_epoch: int = 0
    best_epoch: int = 0
    best_loss: float = float("inf")

    @property
    def schema_hash(self) -> str:
        return self.schema.content_hash

    def metadata(self) -> dict:
        return {
            "config": self.config.model_dump(mode="json", by_alias=True),
            "dims": self.model.dims.model_dump(mode="json"),
            "attribute_names": list(self.model.attribute_names),
            "schema": self.schema.model_dump(mode="json", exclude_none=True),
            "schema_hash": self.schema_hash,
            "final_epoch": self.final_epoch,
            "best_epoch": self.best_epoch,
            "best_loss": self.best_loss,
            "banks": {str(c): {"ids": b.ids.tolist()} for c, b in sorted(self.banks.items())},
        }

    def describe(self) -> dict:
        """Small JSON-friendly summary (no weights)."""
        return {
            "variant": self.config.variant,
            "schema_hash": self.schema_hash,
            "attributes": len(self.model.attribute_names),
            "latent_dim": self.model.dims.latent_dim,
            "embedding_dim": self.model.dims.embedding_dim,
            "parameters": int(sum(p.value.size for p in self.model.parameters())),
            "final_epoch": self.final_epoch,
            "best_epoch": self.best_epoch,
            "best_loss": self.best_loss,
            "bank_sizes": {str(c): len(b) for c, b in sorted(self.banks.items())},
        }


def _blobs(checkpoint: Checkpoint) -> Dict[str, np.ndarray]:
    blobs = {name: p.value for name, p in checkpoint.model.params.items()}
    for condition, bank in sorted(checkpoint.banks.items()):
        blobs[f"bank.{condition}.mu"] = bank.vectors
        if bank.logvars is not None:
            blobs[f"bank.{condition}.logvar"] = bank.logvars
    return blobs


def checkpoint_bytes(checkpoint: Checkpoint) -> bytes:
    """Serialize a checkpoint; identical inputs give identical bytes."""
    blobs = _blobs(checkpoint)
    meta = checkpoint.metadata()
    meta["blobs"] = [[name, list(value.shape)] for name, value in blobs.items()]
    meta_bytes = json.dumps(meta, sort_keys=True, separators=(",", ":")).encode("utf-8")

    parts = [
        MAGIC, struct.pack("<I", FORMAT_VERSION), struct.pack("<Q", len(meta_bytes)), meta_bytes
    ]
    for name, value in blobs.items():
        encoded = name.encode("utf-8")
        payload = np.ascontiguousarray(value, dtype="<f4").tobytes()
        parts += [struct.pack("<I", len(encoded)), encoded]
        parts += [struct.pack("<Q", len(payload)), payload]
    return b"".join(parts)


def save_checkpoint(checkpoint: Checkpoint, path: Union[str, Path]) -> Path:
    """
    Write a checkpoint file.

    Raises:
        IoError: If the path is not writable
    """
    out = Path(path)
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_bytes(checkpoint_bytes(checkpoint))
    except OSError as e:
        raise IoError(f"Cannot write checkpoint {out}: {e}")
    logger.info("Saved checkpoint %s (schema %s)", out, checkpoint.schema_hash[:12])
    return out


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int, what: str) -> bytes:
        if self.pos + n > len(self.data):
            raise TruncatedCheckpointError(
                f"Checkpoint truncated while reading {what} "
                f"({len(self.data) - self.pos} of {n} bytes left)"
            )
        chunk = self.data[self.pos: self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt: str, what: str) -> int:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), what))[0]


def parse_checkpoint(data: bytes, expected_schema_hash: Optional[str] = None) -> Checkpoint:
    """
    Decode checkpoint bytes.

    Raises:
        MagicError: Wrong leading bytes
        VersionError: Unsupported format version
        SchemaMismatchError: Schema hash differs from ``expected_schema_hash``
        TruncatedCheckpointError: Data ends early
        CheckpointError: Metadata or blob manifest is inconsistent
    """
    reader = _Reader(data)
    if reader.take(len(MAGIC), "magic") != MAGIC:
        raise MagicError("Not a tabgen checkpoint (bad magic bytes)")
    version = reader.unpack("<I", "version")
    if version != FORMAT_VERSION:
        raise VersionError(f"Unsupported checkpoint version {version} (expected {FORMAT_VERSION})")
    meta_len = reader.unpack("<Q", "metadata length")
    try:
        meta = json.loads(reader.take(meta_len, "metadata").decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointError(f"Corrupt checkpoint metadata: {e}")
    if not isinstance(meta, dict):
        raise CheckpointError("Corrupt checkpoint metadata: not a JSON object")
    missing = sorted(METADATA_KEYS - set(meta))
    if missing:
        raise CheckpointError(f"Corrupt checkpoint metadata: missing {', '.join(missing)}")

    if expected_schema_hash is not None and meta["schema_hash"] != expected_schema_hash:
        raise SchemaMismatchError(
            f"Checkpoint schema {meta['schema_hash'][:12]} != expected {expected_schema_hash[:12]}"
        )

    arrays: Dict[str, np.ndarray] = {}
    try:
        manifest = [(str(name), tuple(int(d) for d in shape)) for name, shape in meta["blobs"]]
    except (TypeError, ValueError) as e:
        raise CheckpointError(f"Corrupt blob manifest: {e}")
    for name, shape in manifest:
        name_len = reader.unpack("<I", f"name length of {name}")
        stored = reader.take(name_len, f"name of {name}").decode("utf-8")
        if stored != name:
            raise CheckpointError(f"Blob order mismatch: expected {name}, found {stored}")
        size = reader.unpack("<Q", f"byte length of {name}")
        expected = int(np.prod(shape)) * 4
        if size != expected:
            raise CheckpointError(f"Blob {name}: {size} bytes, manifest says {expected}")
        payload = reader.take(size, f"payload of {name}")
        arrays[name] = np.frombuffer(payload, dtype="<f4").astype(np.float64).reshape(shape)

    try:
        return _assemble(meta, arrays)
    except (KeyError, TypeError, ValueError) as e:
        raise CheckpointError(f"Corrupt checkpoint metadata: {e!r}")


def _assemble(meta: dict, arrays: Dict[str, np.ndarray]) -> Checkpoint:
    schema = Schema.model_validate(meta["schema"])
    if schema.content_hash != meta["schema_hash"]:
        raise CheckpointError("Embedded schema does not match its recorded hash")
    dims = ModelDims.model_validate(meta["dims"])
    params = {n: Parameter(n, v) for n, v in arrays.items() if not n.startswith("bank.")}
    model = CvaeModel(dims, meta["attribute_names"], params).freeze()

    banks = {}
    for key, info in meta["banks"].items():
        condition = int(key)
        banks[condition] = LatentBank(
            condition,
            arrays[f"bank.{condition}.mu"],
            np.asarray(info["ids"], dtype=np.int64),
            arrays.get(f"bank.{condition}.logvar"),
        )
    return Checkpoint(
        model=model,
        config=TrainingConfig.model_validate(meta["config"]),
        schema=schema,
        banks=banks,
        final_epoch=int(meta["final_epoch"]),
        best_epoch=int(meta["best_epoch"]),
        best_loss=float(meta["best_loss"]),
    )


def load_checkpoint(path: Union[str, Path],
                    expected_schema_hash: Optional[str] = None) -> Checkpoint:
    """Read and decode a checkpoint file (see :func:`parse_checkpoint`)."""
    try:
        data = Path(path).read_bytes()
    except FileNotFoundError:
        raise IoError(f"Checkpoint not found: {path}")
    except OSError as e:
        raise IoError(f"Cannot read checkpoint {path}: {e}")
    return parse_checkpoint(data, expected_schema_hash)
