"""Tests for the downstream classifiers."""

import numpy as np
import pytest

from tabgen.errors import ConfigError, ContractError
from tabgen.evaluation.classifiers import (
    DecisionTree,
    FeatureEncoder,
    LogisticRegression,
    MLPClassifier,
    RandomForest,
    canonical_kind,
    expand_grid,
    gini_from_counts,
    train_classifier,
)


@pytest.fixture
def separable():
    """Two well-separated 2-D clusters."""
    gen = np.random.default_rng(0)
    X = np.concatenate([gen.normal(-2.0, 0.5, (40, 2)), gen.normal(2.0, 0.5, (40, 2))])
    y = np.array([0] * 40 + [1] * 40)
    return X, y


def test_logreg_separable(separable):
    """Test logistic regression fits a separable set perfectly."""
    X, y = separable
    model = LogisticRegression().fit(X, y)
    assert np.mean(model.predict(X) == y) == 1.0
    assert np.all((model.predict_proba(X) >= 0.0) & (model.predict_proba(X) <= 1.0))


def test_logreg_penalty_shrinks(separable):
    """Test a larger L2 penalty gives smaller weights."""
    X, y = separable
    loose = LogisticRegression(l2=1e-3).fit(X, y)
    tight = LogisticRegression(l2=1.0).fit(X, y)
    assert np.linalg.norm(tight.coef_) < np.linalg.norm(loose.coef_)


def test_mlp_learns_separable(separable):
    """Test the MLP separates the clusters."""
    X, y = separable
    model = MLPClassifier(hidden=8, lr=1e-2, epochs=30, batch_size=16, seed=1).fit(X, y)
    assert np.mean(model.predict(X) == y) >= 0.95


def test_gini():
    """Test impurity of balanced, empty and pure nodes."""
    np.testing.assert_allclose(gini_from_counts([[5, 5], [0, 0], [10, 0]]), [0.5, 0.0, 0.0])


def test_tree_memorises():
    """Test an unbounded tree fits any consistent labelling."""
    gen = np.random.default_rng(1)
    X = gen.integers(0, 5, (60, 4)).astype(float)
    X = np.unique(X, axis=0)
    y = gen.integers(0, 2, X.shape[0])
    tree = DecisionTree().fit(X, y)
    np.testing.assert_array_equal(tree.predict(X), y)


def test_single_tree_forest_memorises():
    """Test a one-tree forest without bagging or feature sampling memorises."""
    gen = np.random.default_rng(2)
    X = np.unique(gen.integers(0, 6, (80, 3)).astype(float), axis=0)
    y = gen.integers(0, 2, X.shape[0])
    forest = RandomForest(n_trees=1, max_depth=None, bootstrap=False, max_features=None).fit(X, y)
    np.testing.assert_array_equal(forest.predict(X), y)


def test_forest_deterministic(separable):
    """Test the same seed grows the same forest."""
    X, y = separable
    a = RandomForest(n_trees=5, seed=3).fit(X, y).predict(X + 0.3)
    b = RandomForest(n_trees=5, seed=3).fit(X, y).predict(X + 0.3)
    np.testing.assert_array_equal(a, b)


def test_feature_encoder(toy_dataset):
    """Test one-hot width and that generation-only columns are excluded."""
    onehot = FeatureEncoder(toy_dataset.schema, one_hot=True)
    assert onehot.attributes == ["age", "sex", "noise_1", "mets_start", "watts_start"]
    X = onehot.transform(toy_dataset)
    assert X.shape == (40, 4 + 3 + 3 + 4 + 3)
    np.testing.assert_array_equal(X.sum(axis=1), 5.0)
    raw = FeatureEncoder(toy_dataset.schema, one_hot=False).transform(toy_dataset)
    assert raw.shape == (40, 5)


def test_grid_expansion_order():
    """Test grid points enumerate sorted keys in value order."""
    assert expand_grid({"b": [1, 2], "a": ["x"]}) == [{"a": "x", "b": 1}, {"a": "x", "b": 2}]


def test_single_point_grid_equals_direct(toy_dataset):
    """Test a one-point grid returns the directly trained model."""
    fitted = train_classifier("logreg", toy_dataset, toy_dataset, {"l2": [0.1]})
    X = FeatureEncoder(toy_dataset.schema, one_hot=True).transform(toy_dataset)
    direct = LogisticRegression(l2=0.1).fit(X, toy_dataset.conditions)
    np.testing.assert_allclose(fitted.model.coef_, direct.coef_)
    assert fitted.params == {"l2": 0.1}
    assert len(fitted.scores) == 1


def test_grid_search_picks_best(toy_dataset):
    """Test the selected point has the best validation score."""
    fitted = train_classifier("forest", toy_dataset, toy_dataset,
                              {"n_trees": [1, 5], "max_depth": [1, None]}, seed=0)
    assert fitted.kind == "random_forest"
    assert fitted.validation_f1 == max(s["f1_weighted"] for s in fitted.scores)


def test_classifier_errors(toy_dataset):
    """Test single-class training sets and unknown kinds."""
    with pytest.raises(ContractError):
        train_classifier("logreg", toy_dataset.with_class(0), toy_dataset)
    with pytest.raises(ConfigError):
        canonical_kind("svm")
