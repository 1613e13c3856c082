"""Conditional record generation from latent banks or the prior."""

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, Field

from tabgen.data.dataset import Dataset
from tabgen.data.schema import CONDITION_LABELS, Schema
from tabgen.errors import BankError, ContractError, IoError
from tabgen.model.cvae import CvaeModel, decode_latents
from tabgen.sampling.bank import LatentBank, knn, smote_interpolate
from tabgen.seeding import rng

logger = logging.getLogger(__name__)

SHARD_SIZE = 512

ConditionLabel = Literal["non-risk", "risk"]


class GenerationRequest(BaseModel):
    """What to generate and how."""

    condition: ConditionLabel
    count: int = Field(ge=1)
    k: int = Field(default=5, ge=1)
    seed: int = 0
    decode: Literal["sample", "argmax"] = "sample"
    sampler: Literal["smote", "prior"] = "smote"
    latent_source: Literal["mean", "sample"] = "mean"

    @property
    def condition_index(self) -> int:
        return CONDITION_LABELS.index(self.condition)


def decode_records(model: CvaeModel, z: np.ndarray, condition: int, mode: str,
                   generator: Optional[np.random.Generator] = None) -> np.ndarray:
    """
    Turn latent vectors into category indices under one condition.

    ``sample`` draws each attribute from its softmax; ``argmax`` takes the mode.
    """
    n = z.shape[0]
    logits = decode_latents(model, z, np.full(n, condition, dtype=np.int64))
    columns = []
    for block in logits:
        if mode == "argmax":
            columns.append(np.argmax(block, axis=1))
            continue
        if generator is None:
            raise ContractError("sample decoding needs a random generator")
        shifted = np.exp(block - block.max(axis=1, keepdims=True))
        cdf = np.cumsum(shifted / shifted.sum(axis=1, keepdims=True), axis=1)
        draws = generator.random((n, 1))
        columns.append(np.minimum((cdf < draws).sum(axis=1), block.shape[1] - 1))
    return np.stack(columns, axis=1).astype(np.int64)


def _smote_shard(model: CvaeModel, bank: LatentBank, request: GenerationRequest,
                 count: int, shard: int) -> np.ndarray:
    generator = rng(request.seed, "generate", request.condition, shard)
    anchors = generator.integers(0, len(bank), size=count)
    picks = generator.integers(0, request.k, size=count)
    u = generator.random((count, 1))
    neighbours: Dict[int, np.ndarray] = {}
    partners = np.empty(count, dtype=np.int64)
    for r, (i, p) in enumerate(zip(anchors, picks)):
        if i not in neighbours:
            neighbours[i] = knn(bank, int(i), request.k)
        partners[r] = neighbours[i][p]
    z = smote_interpolate(bank.vectors[anchors], bank.vectors[partners], u)
    return decode_records(model, z, request.condition_index, request.decode, generator)


def _prior_shard(model: CvaeModel, request: GenerationRequest, count: int,
                 shard: int) -> np.ndarray:
    generator = rng(request.seed, "prior", request.condition, shard)
    z = generator.standard_normal((count, model.dims.latent_dim))
    return decode_records(model, z, request.condition_index, request.decode, generator)


def _shards(count: int) -> List[int]:
    sizes = [SHARD_SIZE] * (count // SHARD_SIZE)
    if count % SHARD_SIZE:
        sizes.append(count % SHARD_SIZE)
    return sizes


def _assemble(schema: Schema, blocks: List[np.ndarray], condition: int) -> Dataset:
    width = len(schema.model_attributes)
    rows = np.concatenate(blocks) if blocks else np.zeros((0, width), np.int64)
    return Dataset(schema, rows, np.full(rows.shape[0], condition, dtype=np.int64))


def generate(model: CvaeModel, banks: Dict[int, LatentBank], request: GenerationRequest,
             schema: Schema, threads: int = 1) -> Dataset:
    """
    Generate ``request.count`` synthetic records of one class.

    Each record picks a random bank row, one of its k nearest neighbours and
    u ~ U(0, 1), interpolates between the two latents and decodes under the
    requested condition. Work is split into fixed-size shards with their own
    derived seeds, so the output does not depend on ``threads``.

    Args:
        model: Frozen model
        banks: Latent banks by condition index
        request: Generation parameters
        schema: Prepared schema of the model
        threads: Worker threads for shards

    Returns:
        Dataset whose rows all carry the requested condition

    Raises:
        BankError: If the bank is missing or not larger than k
    """
    if request.sampler == "prior":
        return prior_sample(model, request.condition, request.count, request.seed,
                            schema=schema, decode=request.decode, threads=threads)

    bank = banks.get(request.condition_index)
    if bank is None:
        raise BankError(f"No latent bank for condition '{request.condition}'")
    if len(bank) <= request.k:
        raise BankError(
            f"Bank for '{request.condition}' has {len(bank)} vectors; k={request.k} needs more"
        )
    if request.latent_source == "sample":
        bank = bank.sampled(rng(request.seed, "bank", request.condition))

    sizes = _shards(request.count)
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        blocks = list(pool.map(lambda a: _smote_shard(model, bank, request, *a),
                               [(size, i) for i, size in enumerate(sizes)]))
    logger.info("Generated %d '%s' records by latent SMOTE (k=%d, decode=%s)",
                request.count, request.condition, request.k, request.decode)
    return _assemble(schema, blocks, request.condition_index)


def prior_sample(model: CvaeModel, condition: str, count: int, seed: int,
                 schema: Schema, decode: str = "sample", threads: int = 1) -> Dataset:
    """Decode ``count`` draws of z ~ N(0, I) under ``condition``."""
    request = GenerationRequest(condition=condition, count=count, seed=seed, decode=decode,
                                sampler="prior")
    sizes = _shards(count)
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        blocks = list(pool.map(lambda a: _prior_shard(model, request, *a),
                               [(size, i) for i, size in enumerate(sizes)]))
    logger.info("Generated %d '%s' records from the prior", count, condition)
    return _assemble(schema, blocks, request.condition_index)


def write_synthetic(dataset: Dataset, path: Union[str, Path], provenance: dict) -> Dict[str, Path]:
    """
    Write synthetic records as CSV plus a ``<name>.provenance.json`` sidecar.

    Returns:
        {"data": csv path, "provenance": sidecar path}
    """
    out = Path(path)
    sidecar = out.with_name(out.name + ".provenance.json")
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        dataset.to_csv(out)
        sidecar.write_text(json.dumps(provenance, indent=2, sort_keys=True) + "\n")
    except OSError as e:
        raise IoError(f"Cannot write synthetic data to {out}: {e}")
    return {"data": out, "provenance": sidecar}
