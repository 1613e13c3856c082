"""Stratified, seeded train/validation/test partitioning."""

import math
from typing import Dict

import numpy as np
from pydantic import BaseModel, Field

from tabgen.data.dataset import Dataset
from tabgen.errors import ContractError, StratificationError
from tabgen.seeding import rng

MIN_CLASS_SIZE = 5


class SplitSpec(BaseModel):
    """Nested split: test carved from all rows, validation from the remainder."""

    test_fraction: float = Field(default=0.2, gt=0.0, lt=1.0)
    validation_fraction: float = Field(default=0.2, gt=0.0, lt=1.0)
    stratify: bool = True
    seed: int = 0


def _holdout(labels: np.ndarray, fraction: float, generator: np.random.Generator,
             stratify: bool) -> np.ndarray:
    """Boolean mask selecting ``ceil(fraction * n)`` held-out rows."""
    n = labels.shape[0]
    n_hold = math.ceil(fraction * n)
    mask = np.zeros(n, dtype=bool)
    if not stratify:
        mask[generator.permutation(n)[:n_hold]] = True
        return mask

    counts = {c: int((labels == c).sum()) for c in (0, 1)}
    minority = min(counts, key=lambda c: (counts[c], c))
    quota = {minority: math.floor(fraction * counts[minority])}
    quota[1 - minority] = n_hold - quota[minority]
    for c in (0, 1):
        members = np.flatnonzero(labels == c)
        chosen = generator.permutation(members)[: quota[c]]
        mask[chosen] = True
    return mask


def split_indices(labels: np.ndarray, spec: SplitSpec) -> Dict[str, np.ndarray]:
    """
    Partition row indices into train/validation/test.

    Test takes ``ceil(test_fraction * n)`` rows; validation takes
    ``ceil(validation_fraction * m)`` of the remaining ``m``. When stratifying,
    the minority class contributes ``floor(fraction * count)`` rows and the
    majority class the rest of the quota.

    Args:
        labels: 0/1 condition label per row
        spec: Split fractions and seed

    Returns:
        {"train", "validation", "test"}: sorted index arrays

    Raises:
        ContractError: If labels are empty
        StratificationError: If a class has fewer than 5 members
    """
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size == 0:
        raise ContractError("split: dataset is empty")
    if spec.stratify:
        for c in (0, 1):
            size = int((labels == c).sum())
            if size < MIN_CLASS_SIZE:
                raise StratificationError(
                    f"Class {c} has {size} member(s); at least {MIN_CLASS_SIZE} are needed"
                )

    generator = rng(spec.seed, "split")
    test_mask = _holdout(labels, spec.test_fraction, generator, spec.stratify)
    rest = np.flatnonzero(~test_mask)
    val_local = _holdout(labels[rest], spec.validation_fraction, generator, spec.stratify)
    return {
        "train": np.sort(rest[~val_local]),
        "validation": np.sort(rest[val_local]),
        "test": np.flatnonzero(test_mask),
    }


def split(dataset: Dataset, spec: SplitSpec) -> Dict[str, Dataset]:
    """Apply :func:`split_indices` to a dataset."""
    parts = split_indices(dataset.conditions, spec)
    return {name: dataset.subset(idx) for name, idx in parts.items()}
