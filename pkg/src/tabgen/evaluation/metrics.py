"""Binary classification metrics."""

from typing import Dict

import numpy as np
from pydantic import BaseModel

from tabgen.errors import ContractError


class ConfusionCounts(BaseModel):
    """One-vs-rest counts for one class."""

    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def support(self) -> int:
        return self.tp + self.fn

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 0.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2.0 * p * r / (p + r) if p + r else 0.0


def confusion(predictions, labels, positive: int) -> ConfusionCounts:
    predictions = np.asarray(predictions)
    labels = np.asarray(labels)
    hit, truth = predictions == positive, labels == positive
    return ConfusionCounts(
        tp=int((hit & truth).sum()),
        fp=int((hit & ~truth).sum()),
        fn=int((~hit & truth).sum()),
        tn=int((~hit & ~truth).sum()),
    )


def f1_scores(predictions, labels) -> Dict[str, float]:
    """
    Per-class and support-weighted F1 for 0/1 labels.

    Zero denominators give precision, recall or F1 of 0.

    Returns:
        {"f1_0", "f1_1", "f1_weighted"}

    Raises:
        ContractError: If the inputs are empty, differ in length or are not binary
    """
    predictions = np.asarray(predictions, dtype=np.int64)
    labels = np.asarray(labels, dtype=np.int64)
    if predictions.size == 0:
        raise ContractError("f1_scores: no predictions")
    if predictions.shape != labels.shape:
        raise ContractError(f"f1_scores: {predictions.shape} predictions vs {labels.shape} labels")
    if not (np.isin(labels, (0, 1)).all() and np.isin(predictions, (0, 1)).all()):
        raise ContractError("f1_scores: labels and predictions must be 0 or 1")

    counts = {c: confusion(predictions, labels, c) for c in (0, 1)}
    n = labels.size
    weighted = sum(counts[c].support / n * counts[c].f1 for c in (0, 1))
    return {"f1_0": counts[0].f1, "f1_1": counts[1].f1, "f1_weighted": weighted}
