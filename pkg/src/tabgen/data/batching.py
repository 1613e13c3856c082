"""Epoch-wise shuffled mini-batches."""

from typing import Iterator, List

import numpy as np

from tabgen.errors import ContractError
from tabgen.seeding import rng


def batch_bounds(n: int, batch_size: int) -> List[tuple]:
    """(start, stop) pairs; a trailing batch of one row is merged into the previous one."""
    bounds = [(s, min(s + batch_size, n)) for s in range(0, n, batch_size)]
    if len(bounds) > 1 and bounds[-1][1] - bounds[-1][0] < 2:
        last = bounds.pop()
        bounds[-1] = (bounds[-1][0], last[1])
    return bounds


def batches(n_rows: int, batch_size: int, seed: int, epoch: int) -> Iterator[np.ndarray]:
    """
    Yield index blocks covering ``range(n_rows)`` once, shuffled per (seed, epoch).

    Args:
        n_rows: Dataset size
        batch_size: Rows per batch (>= 2, contrastive loss needs negatives)
        seed: Master seed
        epoch: Epoch number

    Yields:
        Integer index arrays
    """
    if batch_size < 2:
        raise ContractError(f"batch_size must be at least 2, got {batch_size}")
    order = rng(seed, "batches", epoch).permutation(n_rows)
    for start, stop in batch_bounds(n_rows, batch_size):
        yield order[start:stop]
