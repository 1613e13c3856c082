"""Indirect validation: downstream classifiers, F1 and class consistency."""

from tabgen.evaluation.classifiers import (
    DEFAULT_GRIDS,
    DecisionTree,
    FittedClassifier,
    LogisticRegression,
    MLPClassifier,
    RandomForest,
    train_classifier,
)
from tabgen.evaluation.consistency import ConsistencyReport, class_consistency
from tabgen.evaluation.experiment import (
    DataAccessLog,
    EvalReport,
    ExperimentConfig,
    ExperimentReport,
    augment,
    augmentation_experiment,
    render_table,
    write_report,
)
from tabgen.evaluation.metrics import ConfusionCounts, f1_scores

__all__ = [
    "DEFAULT_GRIDS",
    "DecisionTree",
    "FittedClassifier",
    "LogisticRegression",
    "MLPClassifier",
    "RandomForest",
    "train_classifier",
    "ConsistencyReport",
    "class_consistency",
    "DataAccessLog",
    "EvalReport",
    "ExperimentConfig",
    "ExperimentReport",
    "augment",
    "augmentation_experiment",
    "render_table",
    "write_report",
    "ConfusionCounts",
    "f1_scores",
]
