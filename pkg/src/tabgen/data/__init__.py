"""Data preparation: schemas, discretization, derived features, pruning, splits."""

from tabgen.data.batching import batches
from tabgen.data.dataset import Dataset
from tabgen.data.discretize import discretize, quantile_edges
from tabgen.data.features import derive_features, risk_from_flags
from tabgen.data.pipeline import PrepareConfig, PreparedData, load_prepared, prepare, write_prepared
from tabgen.data.prune import prune_correlated
from tabgen.data.schema import AttributeSpec, RawColumn, RawSchema, Schema, load_schema, save_schema
from tabgen.data.split import SplitSpec, split, split_indices

__all__ = [
    "batches",
    "Dataset",
    "discretize",
    "quantile_edges",
    "derive_features",
    "risk_from_flags",
    "PrepareConfig",
    "PreparedData",
    "load_prepared",
    "prepare",
    "write_prepared",
    "prune_correlated",
    "AttributeSpec",
    "RawColumn",
    "RawSchema",
    "Schema",
    "load_schema",
    "save_schema",
    "SplitSpec",
    "split",
    "split_indices",
]
