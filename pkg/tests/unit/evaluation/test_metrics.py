"""Tests for F1 metrics."""

import numpy as np
import pytest

from tabgen.errors import ContractError
from tabgen.evaluation.metrics import confusion, f1_scores


def _f1_oracle(pred, true, positive):
    tp = sum(1 for p, t in zip(pred, true) if p == positive and t == positive)
    fp = sum(1 for p, t in zip(pred, true) if p == positive and t != positive)
    fn = sum(1 for p, t in zip(pred, true) if p != positive and t == positive)
    if 2 * tp + fp + fn == 0:
        return 0.0
    return 2 * tp / (2 * tp + fp + fn)


def test_hand_confusion():
    """Test TP=3, FP=1, FN=2 gives precision 0.75, recall 0.6, F1 2/3."""
    pred = [1, 1, 1, 1, 0, 0, 0, 0, 0, 0]
    true = [1, 1, 1, 0, 1, 1, 0, 0, 0, 0]
    counts = confusion(pred, true, positive=1)
    assert (counts.tp, counts.fp, counts.fn, counts.tn) == (3, 1, 2, 4)
    assert counts.precision == pytest.approx(0.75)
    assert counts.recall == pytest.approx(0.6)
    assert f1_scores(pred, true)["f1_1"] == pytest.approx(2 / 3)


def test_perfect_predictions():
    """Test perfect predictions score 1 everywhere."""
    labels = [0, 1, 1, 0, 1]
    assert f1_scores(labels, labels) == {"f1_0": 1.0, "f1_1": 1.0, "f1_weighted": 1.0}


def test_constant_predictor():
    """Test predicting the majority on 60/40 data."""
    labels = [0] * 60 + [1] * 40
    scores = f1_scores([0] * 100, labels)
    assert scores["f1_1"] == 0.0
    assert scores["f1_0"] == pytest.approx(0.75)
    assert scores["f1_weighted"] == pytest.approx(0.6 * 0.75)


def test_against_oracle():
    """Test 1000 random cases against a direct recount."""
    gen = np.random.default_rng(0)
    for _ in range(1000):
        n = int(gen.integers(1, 30))
        pred, true = gen.integers(0, 2, n), gen.integers(0, 2, n)
        scores = f1_scores(pred, true)
        f0, f1 = _f1_oracle(pred, true, 0), _f1_oracle(pred, true, 1)
        share = np.mean(true == 1)
        assert scores["f1_0"] == pytest.approx(f0)
        assert scores["f1_1"] == pytest.approx(f1)
        assert scores["f1_weighted"] == pytest.approx((1 - share) * f0 + share * f1)


def test_invalid_inputs():
    """Test empty, mismatched and non-binary inputs."""
    with pytest.raises(ContractError):
        f1_scores([], [])
    with pytest.raises(ContractError):
        f1_scores([0, 1], [0])
    with pytest.raises(ContractError):
        f1_scores([0, 2], [0, 1])
