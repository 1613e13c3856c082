"""Declarative column descriptions for raw and prepared tables."""

import hashlib
import json
from pathlib import Path
from typing import Dict, List, Literal, Optional, Union

from pydantic import BaseModel, Field, PrivateAttr, ValidationError, model_validator

from tabgen.errors import EncodingError, IoError, SchemaError

Role = Literal["feature", "generation-only", "condition", "label"]
PreparedKind = Literal["continuous-binned", "categorical", "binary"]
RawKind = Literal["continuous", "date", "categorical", "binary"]

MISSING_LABEL = "missing"
SCHEMA_VERSION = "1"

# The four exercise-test measurements whose improvement defines the condition.
ERGOMETRY_VARIABLES = ("vo2_peak", "watts", "mets", "duration")
CONDITION_LABELS = ("non-risk", "risk")


def ergometry_columns(variable: str) -> tuple:
    """(start, end) column names of an ergometry variable."""
    return f"{variable}_start", f"{variable}_end"


class AttributeSpec(BaseModel):
    """One prepared (fully categorical) attribute."""

    name: str
    kind: PreparedKind
    categories: List[str]
    role: Role = "feature"
    edges: Optional[List[float]] = None
    midpoints: Optional[List[float]] = None
    missing_index: Optional[int] = None

    @model_validator(mode="after")
    def _check(self) -> "AttributeSpec":
        if not self.categories:
            raise ValueError(f"{self.name}: categories must be non-empty")
        if self.missing_index is not None and self.missing_index != len(self.categories) - 1:
            raise ValueError(f"{self.name}: the missing category must be the last index")
        if self.kind == "continuous-binned":
            if not self.edges:
                raise ValueError(f"{self.name}: binned attribute needs edges")
            if any(b <= a for a, b in zip(self.edges, self.edges[1:])):
                raise ValueError(f"{self.name}: bin edges must be strictly increasing")
            if len(self.value_categories) != len(self.edges) + 1:
                raise ValueError(f"{self.name}: expected {len(self.edges) + 1} value bins")
            if self.midpoints is not None and len(self.midpoints) != len(self.edges) + 1:
                raise ValueError(f"{self.name}: one midpoint per value bin is required")
        if self.role == "condition":
            if self.kind != "binary" or self.missing_index is not None or len(self.categories) != 2:
                raise ValueError(f"{self.name}: the condition must be binary without missing")
        return self

    @property
    def cardinality(self) -> int:
        return len(self.categories)

    @property
    def value_categories(self) -> List[str]:
        """Categories excluding the missing one."""
        if self.missing_index is None:
            return list(self.categories)
        return self.categories[: self.missing_index]

    def encode_label(self, label: Optional[str]) -> int:
        """Category index for a label; ``None``/empty maps to missing."""
        if label is None or label == "":
            if self.missing_index is None:
                raise EncodingError(f"{self.name}: missing value but attribute is not nullable")
            return self.missing_index
        try:
            return self.categories.index(label)
        except ValueError:
            raise EncodingError(f"{self.name}: unknown category '{label}'")

    def decode_index(self, index: int) -> str:
        if not 0 <= index < self.cardinality:
            raise EncodingError(f"{self.name}: index {index} outside 0..{self.cardinality - 1}")
        return self.categories[index]


class Schema(BaseModel):
    """Ordered list of prepared attributes."""

    version: str = SCHEMA_VERSION
    attributes: List[AttributeSpec]
    _by_name: Dict[str, AttributeSpec] = PrivateAttr(default_factory=dict)

    @model_validator(mode="after")
    def _check(self) -> "Schema":
        names = [a.name for a in self.attributes]
        duplicates = sorted({n for n in names if names.count(n) > 1})
        if duplicates:
            raise ValueError(f"Duplicate attribute names: {duplicates}")
        conditions = [a for a in self.attributes if a.role == "condition"]
        if len(conditions) != 1:
            raise ValueError(f"Exactly one condition attribute required, found {len(conditions)}")
        generation_only = {a.name for a in self.attributes if a.role == "generation-only"}
        allowed = {ergometry_columns(v)[1] for v in ERGOMETRY_VARIABLES}
        if not generation_only <= allowed:
            raise ValueError(
                "Generation-only attributes must be ergometry end values: "
                f"{sorted(generation_only - allowed)}"
            )
        self._by_name = {a.name: a for a in self.attributes}
        return self

    @property
    def names(self) -> List[str]:
        return [a.name for a in self.attributes]

    @property
    def condition(self) -> AttributeSpec:
        return next(a for a in self.attributes if a.role == "condition")

    @property
    def model_attributes(self) -> List[AttributeSpec]:
        """Attributes the generative model reconstructs (everything but the condition)."""
        return [a for a in self.attributes if a.role != "condition"]

    @property
    def feature_attributes(self) -> List[AttributeSpec]:
        """Attributes visible to downstream classifiers."""
        return [a for a in self.attributes if a.role == "feature"]

    @property
    def cardinalities(self) -> List[int]:
        return [a.cardinality for a in self.model_attributes]

    def get(self, name: str) -> Optional[AttributeSpec]:
        return self._by_name.get(name)

    def __getitem__(self, name: str) -> AttributeSpec:
        try:
            return self._by_name[name]
        except KeyError:
            raise SchemaError(f"Unknown attribute: {name}")

    def without(self, names) -> "Schema":
        """Copy of this schema with the named attributes removed."""
        drop = set(names)
        kept = [a for a in self.attributes if a.name not in drop]
        return Schema(version=self.version, attributes=kept)

    def to_json(self) -> str:
        return json.dumps(self.model_dump(mode="json", exclude_none=True), indent=2, sort_keys=True)

    @property
    def content_hash(self) -> str:
        """SHA-256 of the canonical JSON form."""
        canonical = json.dumps(self.model_dump(mode="json", exclude_none=True), sort_keys=True,
                               separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class RawColumn(BaseModel):
    """One column of a raw (pre-preparation) table."""

    name: str
    kind: RawKind
    role: Role = "feature"
    categories: Optional[List[str]] = None

    @model_validator(mode="after")
    def _check(self) -> "RawColumn":
        if self.kind in ("categorical", "binary") and not self.categories:
            raise ValueError(f"{self.name}: {self.kind} column needs categories")
        if self.kind == "binary" and len(self.categories) != 2:
            raise ValueError(f"{self.name}: binary column needs exactly two categories")
        return self


class RawSchema(BaseModel):
    """Column descriptions of a raw CSV file."""

    version: str = SCHEMA_VERSION
    attributes: List[RawColumn]

    @model_validator(mode="after")
    def _check(self) -> "RawSchema":
        names = [c.name for c in self.attributes]
        if len(names) != len(set(names)):
            raise ValueError("Duplicate column names in raw schema")
        return self

    @property
    def names(self) -> List[str]:
        return [c.name for c in self.attributes]

    def column(self, name: str) -> Optional[RawColumn]:
        return next((c for c in self.attributes if c.name == name), None)

    def to_json(self) -> str:
        return json.dumps(self.model_dump(mode="json", exclude_none=True), indent=2, sort_keys=True)


def load_schema(path: Union[str, Path]) -> Union[Schema, RawSchema]:
    """
    Load a schema JSON file, detecting whether it is raw or prepared.

    Args:
        path: Schema file path

    Returns:
        Schema for prepared files, RawSchema otherwise

    Raises:
        IoError: If the file cannot be read
        SchemaError: If the content is invalid
    """
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise IoError(f"Schema file not found: {path}")
    except (OSError, json.JSONDecodeError) as e:
        raise IoError(f"Cannot read schema {path}: {e}")

    kinds = {a.get("kind") for a in payload.get("attributes", [])}
    model = RawSchema if kinds & {"continuous", "date"} else Schema
    try:
        return model.model_validate(payload)
    except ValidationError as e:
        if model is Schema:
            try:
                return RawSchema.model_validate(payload)
            except ValidationError:
                pass
        raise SchemaError(f"Invalid schema {path}: {e}")


def save_schema(schema: Union[Schema, RawSchema], path: Union[str, Path]) -> None:
    """Write a schema as pretty-printed, key-sorted JSON."""
    Path(path).write_text(schema.to_json() + "\n", encoding="utf-8")
