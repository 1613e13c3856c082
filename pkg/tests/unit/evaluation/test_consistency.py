"""Tests for class-consistency checking."""

import numpy as np
import pytest

from tabgen.data.dataset import Dataset
from tabgen.data.schema import AttributeSpec, Schema
from tabgen.errors import SchemaError
from tabgen.evaluation.consistency import class_consistency



def _record(mets=(3, 3), watts=(2, 2)):
    return [0, 0, 0, mets[0], mets[1], watts[0], watts[1]]


def test_non_risk_improvement_is_consistent(toy_schema):
    """Test METs 5.0 to 6.0 supports a non-risk label."""
    ds = Dataset(toy_schema, [_record(mets=(1, 2))], [0])
    report = class_consistency(ds)
    assert report.accuracy("non-risk") == 1.0
    assert report.accuracy("risk") is None


def test_risk_without_improvement_is_consistent(toy_schema):
    """Test a 10% watts gain and flat METs support a risk label."""
    ds = Dataset(toy_schema, [_record(mets=(1, 1), watts=(0, 1))], [1])
    assert class_consistency(ds).accuracy("risk") == 1.0


def test_inconsistent_records(toy_schema):
    """Test contradicting records lower the accuracy."""
    rows = [_record(mets=(1, 2)), _record(mets=(1, 1)), _record(mets=(0, 2))]
    ds = Dataset(toy_schema, rows, [1, 0, 1])
    report = class_consistency(ds)
    assert report.accuracy("risk") == 0.0
    assert report.accuracy("non-risk") == 0.0
    assert report.summary() == {"non-risk": 0.0, "risk": 0.0}


def test_missing_pairs_are_indeterminate(toy_schema):
    """Test records without any complete pair are excluded."""
    rows = [_record(), _record(mets=(1, 3)), _record(mets=(1, 2))]
    report = class_consistency(Dataset(toy_schema, rows, [0, 0, 0]))
    cls = report.classes["non-risk"]
    assert (cls.consistent, cls.determinate, cls.indeterminate) == (1, 1, 2)
    assert report.accuracy("non-risk") == 1.0


def test_needs_ergometry_pair():
    """Test a schema without ergometry pairs cannot be checked."""
    schema = Schema(attributes=[
        AttributeSpec(name="a", kind="categorical", categories=["x", "y"]),
        AttributeSpec(name="risk", kind="binary", role="condition",
                      categories=["non-risk", "risk"]),
    ])
    with pytest.raises(SchemaError):
        class_consistency(Dataset(schema, np.zeros((2, 1)), [0, 1]))


def test_training_data_mostly_consistent(bench_prepared):
    """Test real training records agree with their labels after binning."""
    report = class_consistency(bench_prepared.train)
    for label in ("non-risk", "risk"):
        assert report.accuracy(label) > 0.5
