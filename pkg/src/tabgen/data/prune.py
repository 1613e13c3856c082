"""Removal of highly correlated attributes (Pearson on category indices)."""

import logging
from typing import Iterable, List, Optional, Tuple

import numpy as np

from tabgen.data.dataset import Dataset

logger = logging.getLogger(__name__)


def pearson_on_indices(
    x: np.ndarray,
    y: np.ndarray,
    x_missing: Optional[int] = None,
    y_missing: Optional[int] = None,
) -> Optional[float]:
    """
    Pearson correlation of two index columns over rows where neither is missing.

    Returns:
        r, or None when fewer than two complete rows remain or a column is constant
    """
    mask = np.ones(x.shape[0], dtype=bool)
    if x_missing is not None:
        mask &= x != x_missing
    if y_missing is not None:
        mask &= y != y_missing
    if mask.sum() < 2:
        return None
    a = x[mask].astype(np.float64)
    b = y[mask].astype(np.float64)
    a = a - a.mean()
    b = b - b.mean()
    denom = np.sqrt((a * a).sum() * (b * b).sum())
    if denom == 0.0:
        return None
    return float((a * b).sum() / denom)


def prune_correlated(
    dataset: Dataset,
    threshold: float = 0.9,
    protected: Iterable[str] = (),
) -> Tuple[Dataset, List[str], List[dict]]:
    """
    Drop the later attribute of every pair with ``|r| > threshold``.

    Pairs are scanned in schema order; an attribute already removed takes no
    further part. Only feature attributes outside ``protected`` are candidates.

    Args:
        dataset: Encoded dataset
        threshold: Absolute correlation above which a pair is redundant
        protected: Attribute names never removed or compared

    Returns:
        (pruned dataset, removed names, list of {"kept", "removed", "r"} records)
    """
    protected = set(protected)
    attrs = [
        (j, a) for j, a in enumerate(dataset.schema.model_attributes)
        if a.role == "feature" and a.name not in protected
    ]
    removed: List[str] = []
    pairs: List[dict] = []
    for pos, (i, first) in enumerate(attrs):
        if first.name in removed:
            continue
        for j, second in attrs[pos + 1:]:
            if second.name in removed:
                continue
            r = pearson_on_indices(
                dataset.rows[:, i], dataset.rows[:, j], first.missing_index, second.missing_index
            )
            if r is not None and abs(r) > threshold:
                removed.append(second.name)
                pairs.append({"kept": first.name, "removed": second.name, "r": r})
                logger.info("Pruned %s (|r|=%.3f with %s)", second.name, abs(r), first.name)

    if not removed:
        return dataset, removed, pairs
    schema = dataset.schema.without(removed)
    return dataset.drop_attributes(removed, schema), removed, pairs
