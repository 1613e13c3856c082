"""Encoded datasets: category indices plus a condition label per record."""

from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from tabgen.data.schema import Schema
from tabgen.errors import ContractError, EncodingError, IoError, SchemaError


class Dataset:
    """
    Encoded records of a prepared schema.

    ``rows`` holds one column per model attribute (every schema attribute
    except the condition), ``conditions`` the 0/1 condition label per row
    (1 = risk). Instances are treated as immutable.
    """

    def __init__(self, schema: Schema, rows: np.ndarray, conditions: np.ndarray,
                 ids: Optional[np.ndarray] = None):
        rows = np.asarray(rows, dtype=np.int64)
        conditions = np.asarray(conditions, dtype=np.int64)
        attributes = schema.model_attributes
        if rows.ndim != 2 or rows.shape[1] != len(attributes):
            raise SchemaError(
                f"Dataset rows have shape {rows.shape}, expected (n, {len(attributes)})"
            )
        if conditions.shape != (rows.shape[0],):
            raise ContractError("Dataset: one condition label per row is required")
        if conditions.size and not np.isin(conditions, (0, 1)).all():
            raise EncodingError("Dataset: condition labels must be 0 or 1")
        for j, attr in enumerate(attributes):
            column = rows[:, j]
            if column.size and (column.min() < 0 or column.max() >= attr.cardinality):
                raise EncodingError(f"{attr.name}: index outside 0..{attr.cardinality - 1}")
        self.schema = schema
        self.rows = rows
        self.conditions = conditions
        self.ids = np.arange(rows.shape[0]) if ids is None else np.asarray(ids, dtype=np.int64)

    def __len__(self) -> int:
        return self.rows.shape[0]

    def __repr__(self) -> str:
        return f"Dataset(n={len(self)}, attributes={self.rows.shape[1]})"

    @property
    def attribute_names(self) -> List[str]:
        return [a.name for a in self.schema.model_attributes]

    def column(self, name: str) -> np.ndarray:
        return self.rows[:, self.attribute_names.index(name)]

    def subset(self, indices: Sequence[int]) -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(self.schema, self.rows[idx], self.conditions[idx], self.ids[idx])

    def with_class(self, condition: int) -> "Dataset":
        return self.subset(np.flatnonzero(self.conditions == condition))

    def class_counts(self) -> Dict[int, int]:
        return {c: int((self.conditions == c).sum()) for c in (0, 1)}

    def drop_attributes(self, names: Sequence[str], schema: Schema) -> "Dataset":
        """Re-project onto ``schema`` after removing ``names``."""
        keep = [j for j, n in enumerate(self.attribute_names) if n not in set(names)]
        return Dataset(schema, self.rows[:, keep], self.conditions, self.ids)

    @staticmethod
    def concat(parts: Sequence["Dataset"]) -> "Dataset":
        if not parts:
            raise ContractError("concat: no datasets given")
        schema = parts[0].schema
        if any(p.schema.content_hash != schema.content_hash for p in parts):
            raise SchemaError("concat: datasets use different schemas")
        return Dataset(
            schema,
            np.concatenate([p.rows for p in parts]),
            np.concatenate([p.conditions for p in parts]),
            np.concatenate([p.ids for p in parts]),
        )

    # ------------------------------------------------------------------
    # Tabular views
    # ------------------------------------------------------------------

    def to_frame(self) -> pd.DataFrame:
        """Category labels in schema order (condition column included, missing as "")."""
        columns = {}
        for attr in self.schema.attributes:
            if attr.role == "condition":
                columns[attr.name] = [attr.categories[c] for c in self.conditions]
            else:
                j = self.attribute_names.index(attr.name)
                labels = np.asarray(attr.categories, dtype=object)
                if attr.missing_index is not None:
                    labels[attr.missing_index] = ""
                columns[attr.name] = labels[self.rows[:, j]]
        return pd.DataFrame(columns, columns=self.schema.names)

    @classmethod
    def from_frame(cls, frame: pd.DataFrame, schema: Schema) -> "Dataset":
        """
        Encode a frame of category labels.

        Raises:
            SchemaError: If a schema column is absent from the frame
            EncodingError: If a label is unknown
        """
        missing = [n for n in schema.names if n not in frame.columns]
        if missing:
            raise SchemaError(f"Column '{missing[0]}' is in the schema but not in the data")
        rows = []
        for attr in schema.model_attributes:
            lookup = {label: i for i, label in enumerate(attr.categories)}
            column = []
            for value in frame[attr.name]:
                if value is None or (isinstance(value, float) and np.isnan(value)) or value == "":
                    column.append(attr.encode_label(None))
                elif value in lookup:
                    column.append(lookup[value])
                else:
                    raise EncodingError(f"{attr.name}: unknown category '{value}'")
            rows.append(column)
        condition = schema.condition
        conditions = [condition.encode_label(v) for v in frame[condition.name]]
        matrix = np.array(rows, dtype=np.int64).T.reshape(len(frame), len(rows))
        return cls(schema, matrix, np.array(conditions, dtype=np.int64))

    def to_csv(self, path: Union[str, Path]) -> None:
        try:
            self.to_frame().to_csv(path, index=False, lineterminator="\n")
        except OSError as e:
            raise IoError(f"Cannot write {path}: {e}")

    @classmethod
    def from_csv(cls, path: Union[str, Path], schema: Schema) -> "Dataset":
        try:
            frame = pd.read_csv(path, dtype=str, keep_default_na=False)
        except FileNotFoundError:
            raise IoError(f"Data file not found: {path}")
        except OSError as e:
            raise IoError(f"Cannot read {path}: {e}")
        return cls.from_frame(frame, schema)
