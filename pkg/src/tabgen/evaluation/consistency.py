"""Semantic check of generated records against the class definition.

A record is non-risk when at least one ergometry variable improved by 15% or
more between program start and end, and risk otherwise. Binned values are
mapped back to numbers through their bin midpoints.
"""

from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel

from tabgen.data.dataset import Dataset
from tabgen.data.features import IMPROVEMENT_THRESHOLD, RATIO_TOLERANCE
from tabgen.data.schema import CONDITION_LABELS, ERGOMETRY_VARIABLES, Schema, ergometry_columns
from tabgen.errors import SchemaError


class ClassConsistency(BaseModel):
    """Consistency outcome for one conditioned class."""

    consistent: int = 0
    determinate: int = 0
    indeterminate: int = 0

    @property
    def accuracy(self) -> Optional[float]:
        return self.consistent / self.determinate if self.determinate else None


class ConsistencyReport(BaseModel):
    """Per-class consistency keyed by condition label."""

    classes: Dict[str, ClassConsistency]

    def accuracy(self, label: str) -> Optional[float]:
        return self.classes[label].accuracy

    def summary(self) -> Dict[str, Optional[float]]:
        return {label: c.accuracy for label, c in self.classes.items()}


def _pairs(schema: Schema, dataset: Dataset) -> List[Tuple[np.ndarray, np.ndarray]]:
    """Per ergometry variable, the numeric start and end midpoint columns (NaN = missing)."""
    pairs = []
    for variable in ERGOMETRY_VARIABLES:
        start, end = ergometry_columns(variable)
        if schema.get(start) is None or schema.get(end) is None:
            continue
        values = []
        for name in (start, end):
            attr = schema[name]
            if attr.midpoints is None:
                raise SchemaError(f"{name}: no bin midpoints to measure improvement with")
            lookup = np.append(np.asarray(attr.midpoints, dtype=np.float64), np.nan)
            values.append(lookup[dataset.column(name)])
        pairs.append((values[0], values[1]))
    if not pairs:
        raise SchemaError("Schema has no complete ergometry start/end pair")
    return pairs


def class_consistency(dataset: Dataset, schema: Optional[Schema] = None) -> ConsistencyReport:
    """
    Share of records whose ergometry evolution matches their condition label.

    For each record, every variable with both values present and a nonzero
    start gives an improvement ratio. Non-risk records are consistent when
    some ratio reaches the threshold, risk records when none does. Records
    without any usable variable are counted as indeterminate and left out of
    the accuracy.

    Args:
        dataset: Encoded (typically synthetic) records
        schema: Prepared schema with midpoints (defaults to the dataset's)

    Returns:
        ConsistencyReport with one entry per class label
    """
    schema = schema or dataset.schema
    pairs = _pairs(schema, dataset)
    n = len(dataset)
    improved = np.zeros(n, dtype=bool)
    usable = np.zeros(n, dtype=bool)
    for start, end in pairs:
        ok = ~np.isnan(start) & ~np.isnan(end) & (start != 0)
        ratio = np.divide(end - start, start, out=np.zeros(n), where=ok)
        usable |= ok
        improved |= ok & (ratio >= IMPROVEMENT_THRESHOLD - RATIO_TOLERANCE)

    classes = {}
    for c, label in enumerate(CONDITION_LABELS):
        member = dataset.conditions == c
        meets = improved if c == 0 else ~improved
        classes[label] = ClassConsistency(
            consistent=int((member & usable & meets).sum()),
            determinate=int((member & usable).sum()),
            indeterminate=int((member & ~usable).sum()),
        )
    return ConsistencyReport(classes=classes)
