"""End-to-end preparation: raw CSV + raw schema to encoded splits."""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field

from tabgen.data.dataset import Dataset
from tabgen.data.discretize import bin_labels, bin_midpoints, discretize, quantile_edges
from tabgen.data.features import CONDITION_COLUMN, derive_features, flag_column, weeks_column
from tabgen.data.prune import prune_correlated
from tabgen.data.schema import (
    CONDITION_LABELS,
    ERGOMETRY_VARIABLES,
    MISSING_LABEL,
    AttributeSpec,
    RawSchema,
    Schema,
    ergometry_columns,
    load_schema,
    save_schema,
)
from tabgen.data.split import SplitSpec, split_indices
from tabgen.errors import IoError, SchemaError

logger = logging.getLogger(__name__)

SPLIT_FILES = {"train": "train.csv", "validation": "val.csv", "test": "test.csv"}


class PrepareConfig(BaseModel):
    """Knobs of the preparation pipeline."""

    n_bins: int = Field(default=5, ge=2)
    ergometry_bins: int = Field(default=10, ge=2)
    prune_threshold: float = Field(default=0.9, gt=0.0, le=1.0)
    split: SplitSpec = Field(default_factory=SplitSpec)


@dataclass
class PreparedData:
    """Encoded splits plus bookkeeping of the preparation run."""

    schema: Schema
    splits: Dict[str, Dataset]
    removed: List[str] = field(default_factory=list)
    pairs: List[dict] = field(default_factory=list)
    rejected: int = 0

    @property
    def train(self) -> Dataset:
        return self.splits["train"]

    @property
    def validation(self) -> Dataset:
        return self.splits["validation"]

    @property
    def test(self) -> Dataset:
        return self.splits["test"]

    def summary(self) -> dict:
        """Structural summary: instances, variables and counts per kind."""
        kinds = [a.kind for a in self.schema.attributes]
        return {
            "instances": sum(len(d) for d in self.splits.values()),
            "variables": len(kinds),
            "categorized": kinds.count("continuous-binned"),
            "categorical": kinds.count("categorical"),
            "binary": kinds.count("binary"),
            "split_sizes": {name: len(d) for name, d in self.splits.items()},
            "rejected_records": self.rejected,
        }


def _check_columns(frame: pd.DataFrame, raw_schema: RawSchema) -> None:
    declared = set(raw_schema.names)
    for column in frame.columns:
        if column not in declared:
            raise SchemaError(f"Column '{column}' is in the data but not in the schema")
    for column in raw_schema.names:
        if column not in frame.columns and column != CONDITION_COLUMN:
            raise SchemaError(f"Column '{column}' is in the schema but not in the data")


def _numeric(frame: pd.DataFrame, column: str) -> np.ndarray:
    return pd.to_numeric(frame[column], errors="coerce").to_numpy(dtype=np.float64)


def _binned_spec(name: str, role: str, fit_values: np.ndarray, n_bins: int) -> AttributeSpec:
    edges = quantile_edges(fit_values, n_bins)
    return AttributeSpec(
        name=name,
        kind="continuous-binned",
        categories=bin_labels(edges) + [MISSING_LABEL],
        role=role,
        edges=edges,
        midpoints=bin_midpoints(edges, fit_values),
        missing_index=len(edges) + 1,
    )


def _categorical_spec(name: str, kind: str, role: str, categories: List[str]) -> AttributeSpec:
    if role == "condition":
        return AttributeSpec(name=name, kind="binary", categories=list(CONDITION_LABELS), role=role)
    return AttributeSpec(
        name=name,
        kind=kind,
        categories=list(categories) + [MISSING_LABEL],
        role=role,
        missing_index=len(categories),
    )


def build_schema(derived: pd.DataFrame, raw_schema: RawSchema, train_rows: np.ndarray,
                 config: PrepareConfig) -> Schema:
    """
    Fit the prepared schema on the training rows of the derived frame.

    Continuous columns get quantile edges; each ergometry start/end pair
    shares edges fitted on the pooled training values of both columns.
    """
    train = derived.iloc[train_rows]
    pair_edges: Dict[str, AttributeSpec] = {}
    for variable in ERGOMETRY_VARIABLES:
        start, end = ergometry_columns(variable)
        if start in derived.columns and end in derived.columns:
            pooled = np.concatenate([_numeric(train, start), _numeric(train, end)])
            pair_edges[variable] = _binned_spec(variable, "feature", pooled, config.ergometry_bins)

    roles = {c.name: c.role for c in raw_schema.attributes}
    flags = {flag_column(v) for v in ERGOMETRY_VARIABLES}
    attributes: List[AttributeSpec] = []
    for column in derived.columns:
        if column in flags:
            continue
        raw = raw_schema.column(column)
        role = roles.get(column, "feature")
        if column == CONDITION_COLUMN:
            attributes.append(_categorical_spec(column, "binary", "condition", []))
            continue
        variable = next((v for v in pair_edges if column in ergometry_columns(v)), None)
        if variable is not None:
            shared = pair_edges[variable]
            if column == ergometry_columns(variable)[1]:
                role = "generation-only"
            attributes.append(shared.model_copy(update={"name": column, "role": role}))
        elif raw is not None and raw.kind in ("categorical", "binary"):
            attributes.append(_categorical_spec(column, raw.kind, role, raw.categories))
        else:
            attributes.append(
                _binned_spec(column, role, _numeric(train, column), config.n_bins)
            )
    return Schema(attributes=attributes)


def encode_frame(derived: pd.DataFrame, schema: Schema) -> Dataset:
    """Encode a derived frame into category indices."""
    rows = []
    for attr in schema.model_attributes:
        if attr.kind == "continuous-binned":
            rows.append(discretize(_numeric(derived, attr.name), attr.edges))
        else:
            values = derived[attr.name].astype(object).where(derived[attr.name].notna(), None)
            rows.append([attr.encode_label(None if v in (None, "") else str(v)) for v in values])
    labels = [schema.condition.encode_label(v) for v in derived[CONDITION_COLUMN]]
    matrix = np.array(rows, dtype=np.int64).T.reshape(len(derived), len(rows))
    return Dataset(schema, matrix, np.array(labels, dtype=np.int64))


def prepare(frame: pd.DataFrame, raw_schema: RawSchema,
            config: Optional[PrepareConfig] = None) -> PreparedData:
    """
    Run derive -> split -> fit bins on train -> discretize -> prune -> encode.

    Args:
        frame: Raw records (strings or numbers, empty = missing)
        raw_schema: Declared raw columns
        config: Preparation settings

    Returns:
        PreparedData with the prepared schema and the three splits

    Raises:
        SchemaError: If data and schema columns disagree
        StratificationError: If a class is too small to split
    """
    config = config or PrepareConfig()
    _check_columns(frame, raw_schema)
    date_columns = [c.name for c in raw_schema.attributes if c.kind == "date"]
    frame = frame.replace("", np.nan)
    derived = derive_features(frame, date_columns=date_columns)
    rejected = len(frame) - len(derived)

    labels = (derived[CONDITION_COLUMN] == CONDITION_LABELS[1]).to_numpy(dtype=np.int64)
    parts = split_indices(labels, config.split)

    schema = build_schema(derived, raw_schema, parts["train"], config)
    encoded = encode_frame(derived, schema)

    protected = {ergometry_columns(v)[0] for v in ERGOMETRY_VARIABLES}
    pruned_train, removed, pairs = prune_correlated(
        encoded.subset(parts["train"]), config.prune_threshold, protected=protected
    )
    schema = pruned_train.schema
    encoded = encoded.drop_attributes(removed, schema)

    splits = {name: encoded.subset(idx) for name, idx in parts.items()}
    logger.info(
        "Prepared %d records: train=%d validation=%d test=%d, pruned=%s",
        len(derived), len(splits["train"]), len(splits["validation"]), len(splits["test"]), removed,
    )
    return PreparedData(schema=schema, splits=splits, removed=removed, pairs=pairs,
                        rejected=rejected)


def write_prepared(prepared: PreparedData, out_dir: Union[str, Path]) -> Dict[str, Path]:
    """
    Write schema.json, train/val/test CSVs, prune_report.json and summary.json.

    Returns:
        Mapping of artefact name to written path
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        written = {"schema": out / "schema.json"}
        save_schema(prepared.schema, written["schema"])
        for name, filename in SPLIT_FILES.items():
            written[name] = out / filename
            prepared.splits[name].to_csv(written[name])
        written["prune_report"] = out / "prune_report.json"
        report = {"threshold_pairs": prepared.pairs, "removed": prepared.removed}
        written["prune_report"].write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
        written["summary"] = out / "summary.json"
        summary = json.dumps(prepared.summary(), indent=2, sort_keys=True)
        written["summary"].write_text(summary + "\n")
    except OSError as e:
        raise IoError(f"Cannot write prepared data to {out}: {e}")
    return written


def load_prepared(data_dir: Union[str, Path]) -> PreparedData:
    """Read a directory written by :func:`write_prepared`."""
    root = Path(data_dir)
    schema = load_schema(root / "schema.json")
    if not isinstance(schema, Schema):
        raise SchemaError(f"{root / 'schema.json'} is a raw schema, not a prepared one")
    splits = {
        name: Dataset.from_csv(root / filename, schema) for name, filename in SPLIT_FILES.items()
    }
    removed: List[str] = []
    report_path = root / "prune_report.json"
    if report_path.exists():
        removed = json.loads(report_path.read_text()).get("removed", [])
    return PreparedData(schema=schema, splits=splits, removed=removed)


def read_raw_csv(path: Union[str, Path]) -> pd.DataFrame:
    """Read a raw CSV keeping every cell as text (empty cell = missing)."""
    try:
        return pd.read_csv(path, dtype=str, keep_default_na=False)
    except FileNotFoundError:
        raise IoError(f"Input file not found: {path}")
    except OSError as e:
        raise IoError(f"Cannot read {path}: {e}")


__all__ = [
    "PrepareConfig",
    "PreparedData",
    "build_schema",
    "encode_frame",
    "prepare",
    "write_prepared",
    "load_prepared",
    "read_raw_csv",
    "weeks_column",
]
