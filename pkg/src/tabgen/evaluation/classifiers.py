"""Downstream classifiers used to measure the value of augmentation.

Three families: L2-regularised logistic regression (fitted with L-BFGS), a
one-hidden-layer MLP trained on the autodiff core, and a random forest of
Gini CART trees. Linear models see one-hot features, trees see category
indices. Only ``feature`` attributes are used, so generation-only columns
never reach a classifier.
"""

import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit

from tabgen.data.batching import batches
from tabgen.data.dataset import Dataset
from tabgen.data.schema import Schema
from tabgen.errors import ConfigError, ContractError
from tabgen.evaluation.metrics import f1_scores
from tabgen.model.losses import reconstruction_ce
from tabgen.numerics import Graph, Parameter
from tabgen.seeding import rng
from tabgen.training.optim import Adam

logger = logging.getLogger(__name__)

KIND_ALIASES = {"forest": "random_forest", "rf": "random_forest"}

DEFAULT_GRIDS: Dict[str, Dict[str, list]] = {
    "logreg": {"l2": [0.0, 1e-3, 1e-1]},
    "mlp": {"hidden": [32, 64], "lr": [1e-3, 1e-2]},
    "random_forest": {"n_trees": [50, 100], "max_depth": [6, 12]},
}


def canonical_kind(kind: str) -> str:
    kind = KIND_ALIASES.get(kind, kind)
    if kind not in DEFAULT_GRIDS:
        raise ConfigError(f"Unknown classifier '{kind}' (expected one of {sorted(DEFAULT_GRIDS)})")
    return kind


# ----------------------------------------------------------------------
# Features
# ----------------------------------------------------------------------


class FeatureEncoder:
    """Maps encoded records to a classifier design matrix."""

    def __init__(self, schema: Schema, one_hot: bool):
        self.schema = schema
        self.one_hot = one_hot
        self.attributes = [a.name for a in schema.feature_attributes]
        self.cardinalities = [schema[a].cardinality for a in self.attributes]

    def transform(self, dataset: Dataset) -> np.ndarray:
        columns = [dataset.column(name) for name in self.attributes]
        if not self.one_hot:
            return np.stack(columns, axis=1).astype(np.float64)
        n = len(dataset)
        blocks = []
        for column, card in zip(columns, self.cardinalities):
            block = np.zeros((n, card))
            block[np.arange(n), column] = 1.0
            blocks.append(block)
        return np.concatenate(blocks, axis=1)


# ----------------------------------------------------------------------
# Logistic regression
# ----------------------------------------------------------------------


class LogisticRegression:
    """Binary logistic regression with an L2 penalty on the weights (not the bias)."""

    def __init__(self, l2: float = 0.0, max_iter: int = 500):
        self.l2 = l2
        self.max_iter = max_iter
        self.coef_: Optional[np.ndarray] = None
        self.intercept_ = 0.0

    def fit(self, X: np.ndarray, y: np.ndarray) -> "LogisticRegression":
        n, d = X.shape
        y = y.astype(np.float64)

        def objective(theta):
            w, b = theta[:d], theta[d]
            z = X @ w + b
            # log(1 + e^z) - y*z, stable for large |z|
            loss = np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * self.l2 * (w @ w)
            residual = (expit(z) - y) / n
            grad = np.append(X.T @ residual + self.l2 * w, residual.sum())
            return loss, grad

        result = minimize(objective, np.zeros(d + 1), jac=True, method="L-BFGS-B",
                          options={"maxiter": self.max_iter})
        self.coef_, self.intercept_ = result.x[:d], float(result.x[d])
        return self

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return expit(X @ self.coef_ + self.intercept_)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return (self.predict_proba(X) >= 0.5).astype(np.int64)


# ----------------------------------------------------------------------
# MLP
# ----------------------------------------------------------------------


class MLPClassifier:
    """One ReLU hidden layer and a two-way softmax, trained with Adam."""

    def __init__(self, hidden: int = 32, lr: float = 1e-3, epochs: int = 30,
                 batch_size: int = 64, seed: int = 0):
        self.hidden = hidden
        self.lr = lr
        self.epochs = epochs
        self.batch_size = batch_size
        self.seed = seed
        self.params: Dict[str, Parameter] = {}

    def _logits(self, graph: Graph, X: np.ndarray):
        h = graph.relu(graph.add(graph.matmul(graph.constant(X), graph.param(self.params["w1"])),
                                 graph.param(self.params["b1"])))
        out = graph.matmul(h, graph.param(self.params["w2"]))
        return graph.add(out, graph.param(self.params["b2"]))

    def fit(self, X: np.ndarray, y: np.ndarray) -> "MLPClassifier":
        generator = rng(self.seed, "mlp", "init")
        d = X.shape[1]
        b1, b2 = 1.0 / np.sqrt(d), 1.0 / np.sqrt(self.hidden)
        self.params = {
            "w1": Parameter("w1", generator.uniform(-b1, b1, (d, self.hidden))),
            "b1": Parameter("b1", np.zeros((1, self.hidden))),
            "w2": Parameter("w2", generator.uniform(-b2, b2, (self.hidden, 2))),
            "b2": Parameter("b2", np.zeros((1, 2))),
        }
        optimizer = Adam(list(self.params.values()), lr=self.lr)
        for epoch in range(self.epochs):
            for idx in batches(X.shape[0], self.batch_size, self.seed, epoch):
                graph = Graph()
                loss = reconstruction_ce([self._logits(graph, X[idx])], y[idx, None])
                optimizer.zero_grad()
                graph.backward(loss)
                optimizer.step()
        return self

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.argmax(self._logits(Graph(), X).value, axis=1).astype(np.int64)


# ----------------------------------------------------------------------
# Trees
# ----------------------------------------------------------------------


def gini_from_counts(counts: np.ndarray) -> np.ndarray:
    """Gini impurity ``1 - sum p_k^2`` along the last axis (0 for empty nodes)."""
    counts = np.asarray(counts, dtype=np.float64)
    n = counts.sum(axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        impurity = 1.0 - (counts ** 2).sum(axis=-1) / (n * n)
    return np.where(n > 0, impurity, 0.0)


@dataclass
class TreeNode:
    counts: np.ndarray
    feature: Optional[int] = None
    threshold: float = 0.0
    left: Optional["TreeNode"] = None
    right: Optional["TreeNode"] = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None

    @property
    def prediction(self) -> int:
        return int(np.argmax(self.counts))


class DecisionTree:
    """
    CART classifier with Gini impurity.

    At each node ``max_features`` features are drawn at random; if none of
    them can split the node the remaining features are tried as well.
    Thresholds are midpoints between adjacent distinct values.
    """

    def __init__(self, max_depth: Optional[int] = None, max_features: Optional[int] = None,
                 min_samples_split: int = 2, generator: Optional[np.random.Generator] = None):
        self.max_depth = max_depth
        self.max_features = max_features
        self.min_samples_split = max(2, min_samples_split)
        self.generator = generator or np.random.default_rng(0)
        self.root: Optional[TreeNode] = None

    def fit(self, X: np.ndarray, y: np.ndarray) -> "DecisionTree":
        self.root = self._grow(X, y, np.arange(X.shape[0]), 0)
        return self

    def _best_split(self, X: np.ndarray, y: np.ndarray, rows: np.ndarray, features: Sequence[int]):
        best = (None, 0.0, np.inf)
        for f in features:
            order = rows[np.argsort(X[rows, f], kind="stable")]
            values = X[order, f]
            cuts = np.flatnonzero(values[1:] != values[:-1])
            if cuts.size == 0:
                continue
            onehot = np.stack([y[order] == 0, y[order] == 1], axis=1).astype(np.int64)
            left = np.cumsum(onehot, axis=0)[cuts]
            right = onehot.sum(axis=0) - left
            n_left = left.sum(axis=1)
            n_right = right.sum(axis=1)
            weighted = n_left * gini_from_counts(left) + n_right * gini_from_counts(right)
            score = weighted / len(rows)
            i = int(np.argmin(score))
            if score[i] < best[2]:
                best = (f, float((values[cuts[i]] + values[cuts[i] + 1]) / 2.0), float(score[i]))
        return best

    def _grow(self, X: np.ndarray, y: np.ndarray, rows: np.ndarray, depth: int) -> TreeNode:
        node = TreeNode(counts=np.bincount(y[rows], minlength=2))
        if (
            (self.max_depth is not None and depth >= self.max_depth)
            or len(rows) < self.min_samples_split
            or np.count_nonzero(node.counts) < 2
        ):
            return node
        order = self.generator.permutation(X.shape[1])
        k = self.max_features or X.shape[1]
        feature, threshold, _ = self._best_split(X, y, rows, order[:k])
        if feature is None and k < X.shape[1]:
            feature, threshold, _ = self._best_split(X, y, rows, order[k:])
        if feature is None:
            return node
        mask = X[rows, feature] <= threshold
        node.feature, node.threshold = int(feature), threshold
        node.left = self._grow(X, y, rows[mask], depth + 1)
        node.right = self._grow(X, y, rows[~mask], depth + 1)
        return node

    def predict(self, X: np.ndarray) -> np.ndarray:
        out = np.empty(X.shape[0], dtype=np.int64)
        for i, x in enumerate(X):
            node = self.root
            while not node.is_leaf:
                node = node.left if x[node.feature] <= node.threshold else node.right
            out[i] = node.prediction
        return out


class RandomForest:
    """Bagged CART trees over sqrt(d) random features per split; majority vote (ties to 0)."""

    def __init__(self, n_trees: int = 50, max_depth: Optional[int] = 6, bootstrap: bool = True,
                 max_features: Optional[str] = "sqrt", seed: int = 0):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.bootstrap = bootstrap
        self.max_features = max_features
        self.seed = seed
        self.trees: List[DecisionTree] = []

    def fit(self, X: np.ndarray, y: np.ndarray) -> "RandomForest":
        n, d = X.shape
        k = max(1, int(np.sqrt(d))) if self.max_features == "sqrt" else None
        self.trees = []
        for t in range(self.n_trees):
            generator = rng(self.seed, "forest", t)
            rows = generator.integers(0, n, size=n) if self.bootstrap else np.arange(n)
            tree = DecisionTree(self.max_depth, k, generator=generator)
            self.trees.append(tree.fit(X[rows], y[rows]))
        return self

    def predict(self, X: np.ndarray) -> np.ndarray:
        votes = np.stack([tree.predict(X) for tree in self.trees])
        return (votes.mean(axis=0) > 0.5).astype(np.int64)


# ----------------------------------------------------------------------
# Grid search
# ----------------------------------------------------------------------


def make_classifier(kind: str, params: dict, seed: int = 0):
    """Instantiate one classifier for a grid point."""
    kind = canonical_kind(kind)
    if kind == "logreg":
        return LogisticRegression(**params)
    if kind == "mlp":
        return MLPClassifier(seed=seed, **params)
    return RandomForest(seed=seed, **params)


@dataclass
class FittedClassifier:
    """Best grid point of a search, ready to score other datasets."""

    kind: str
    params: dict
    model: object
    encoder: FeatureEncoder
    validation_f1: float
    scores: List[dict] = field(default_factory=list)

    def predict(self, dataset: Dataset) -> np.ndarray:
        return self.model.predict(self.encoder.transform(dataset))


def expand_grid(grid: Dict[str, list]) -> List[dict]:
    keys = sorted(grid)
    return [dict(zip(keys, values)) for values in itertools.product(*(grid[k] for k in keys))]


def train_classifier(kind: str, train: Dataset, val: Dataset,
                     grid: Optional[Dict[str, list]] = None, seed: int = 0) -> FittedClassifier:
    """
    Exhaustive grid search scored by weighted F1 on the validation set.

    Ties keep the earliest grid point (keys sorted, values in given order).

    Raises:
        ContractError: If the training set holds a single class
        ConfigError: If the classifier kind is unknown
    """
    kind = canonical_kind(kind)
    if len(np.unique(train.conditions)) < 2:
        raise ContractError(f"{kind}: training set contains a single class")
    encoder = FeatureEncoder(train.schema, one_hot=kind != "random_forest")
    X, y = encoder.transform(train), train.conditions
    X_val = encoder.transform(val)

    best: Optional[FittedClassifier] = None
    scores = []
    for params in expand_grid(grid or DEFAULT_GRIDS[kind]):
        model = make_classifier(kind, params, seed).fit(X, y)
        score = f1_scores(model.predict(X_val), val.conditions)["f1_weighted"]
        scores.append({"params": params, "f1_weighted": score})
        logger.debug("%s %s: validation weighted F1 %.4f", kind, params, score)
        if best is None or score > best.validation_f1:
            best = FittedClassifier(kind, params, model, encoder, score)
    best.scores = scores
    return best
