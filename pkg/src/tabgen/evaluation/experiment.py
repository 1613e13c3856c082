"""Augmentation experiment: does adding synthetic records help classifiers?

The training split is expanded by a factor f with (f - 1) * n_c synthetic
records per class c, so class proportions are kept. Validation and test
splits are never augmented. Classifiers are tuned on validation and scored
once on test. Every split read goes through a :class:`DataAccessLog`.
"""

import json
import logging
import statistics
import threading
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple, Union

import pandas as pd
from pydantic import BaseModel, Field, field_validator

from tabgen.data.dataset import Dataset
from tabgen.data.pipeline import PreparedData
from tabgen.data.schema import CONDITION_LABELS
from tabgen.errors import ContractError, IoError, SchemaMismatchError
from tabgen.evaluation.classifiers import DEFAULT_GRIDS, canonical_kind, train_classifier
from tabgen.evaluation.consistency import class_consistency
from tabgen.evaluation.metrics import f1_scores
from tabgen.sampling.generate import GenerationRequest, generate
from tabgen.seeding import derive_seed
from tabgen.training.checkpoint import Checkpoint

logger = logging.getLogger(__name__)

Split = Literal["train", "validation", "test"]


class ExperimentConfig(BaseModel):
    """Grid of the augmentation experiment."""

    factors: List[int] = Field(default_factory=lambda: [2, 5])
    classifiers: List[str] = Field(default_factory=lambda: ["logreg", "mlp", "random_forest"])
    seeds: int = Field(default=5, ge=1)
    seed: int = 0
    k: int = Field(default=5, ge=1)
    decode: Literal["sample", "argmax"] = "sample"
    consistency_count: int = Field(default=500, ge=1)
    grids: Optional[Dict[str, Dict[str, list]]] = None
    threads: int = Field(default=1, ge=1)

    @field_validator("factors")
    @classmethod
    def _factors(cls, value: List[int]) -> List[int]:
        if any(f < 2 for f in value):
            raise ValueError("augmentation factors must be at least 2")
        return value

    @field_validator("classifiers")
    @classmethod
    def _classifiers(cls, value: List[str]) -> List[str]:
        return [canonical_kind(kind) for kind in value]

    def grid(self, kind: str) -> Dict[str, list]:
        return (self.grids or {}).get(kind, DEFAULT_GRIDS[kind])


class AccessRecord(BaseModel):
    """One read of a split."""

    split: Split
    purpose: str
    actor: str


class DataAccessLog:
    """Thread-safe record of which split was read, by whom and why."""

    def __init__(self):
        self._records: List[AccessRecord] = []
        self._lock = threading.Lock()

    def record(self, split: Split, purpose: str, actor: str) -> None:
        with self._lock:
            self._records.append(AccessRecord(split=split, purpose=purpose, actor=actor))

    def extend(self, records: List[AccessRecord]) -> None:
        with self._lock:
            self._records.extend(records)

    def records(self) -> List[AccessRecord]:
        with self._lock:
            return list(self._records)

    def reads(self, split: Split) -> List[AccessRecord]:
        return [r for r in self.records() if r.split == split]


class _AuditedSplits:
    """Hands out splits only through the access log."""

    def __init__(self, prepared: PreparedData, log: DataAccessLog):
        self._splits = prepared.splits
        self._log = log

    def get(self, split: Split, purpose: str, actor: str) -> Dataset:
        if split == "test" and purpose != "score":
            raise ContractError(f"{actor}: the test split may only be read for scoring")
        self._log.record(split, purpose, actor)
        return self._splits[split]


class EvalReport(BaseModel):
    """Test metrics of one fitted classifier."""

    generator: str
    factor: int
    classifier: str
    seed: int
    train_size: int
    synthetic_size: int = 0
    f1_risk: float
    f1_non_risk: float
    f1_weighted: float
    validation_f1: float
    params: dict = Field(default_factory=dict)
    consistency: Optional[Dict[str, Optional[float]]] = None


class ExperimentReport(BaseModel):
    """Everything an experiment produced."""

    schema_hash: str
    config: ExperimentConfig
    reports: List[EvalReport]
    consistency: Dict[str, Dict[str, Optional[float]]] = Field(default_factory=dict)
    access_log: List[AccessRecord] = Field(default_factory=list)

    def baseline(self) -> List[EvalReport]:
        return [r for r in self.reports if r.generator == "baseline"]

    def median_delta(self, generator: str, factor: int, classifier: str,
                     metric: str = "f1_weighted") -> float:
        """Median over seeds of (augmented - baseline) for ``metric``."""
        base = {r.seed: getattr(r, metric) for r in self.baseline() if r.classifier == classifier}
        deltas = [
            getattr(r, metric) - base[r.seed]
            for r in self.reports
            if r.generator == generator and r.factor == factor and r.classifier == classifier
        ]
        if not deltas:
            raise ContractError(f"No reports for {generator} x{factor} / {classifier}")
        return statistics.median(deltas)

    def to_json(self) -> str:
        """Sorted-key JSON of the report, without the thread count."""
        data = self.model_dump(mode="json", exclude={"config": {"threads"}})
        return json.dumps(data, indent=2, sort_keys=True)


def _score(fitted, test: Dataset) -> Dict[str, float]:
    return f1_scores(fitted.predict(test), test.conditions)


def synthetic_counts(train: Dataset, factor: int) -> Dict[int, int]:
    """(factor - 1) * n_c synthetic records per class."""
    return {c: (factor - 1) * n for c, n in train.class_counts().items()}


def augment(train: Dataset, checkpoint: Checkpoint, factor: int, seed: int,
            k: int = 5, decode: str = "sample") -> Dataset:
    """Synthetic records for one augmentation factor (training records not included)."""
    parts = []
    for c, count in synthetic_counts(train, factor).items():
        if count == 0:
            continue
        request = GenerationRequest(condition=CONDITION_LABELS[c], count=count, k=k,
                                    seed=seed, decode=decode)
        parts.append(generate(checkpoint.model, checkpoint.banks, request, checkpoint.schema))
    return Dataset.concat(parts)


def augmentation_experiment(prepared: PreparedData, generators: Dict[str, Checkpoint],
                            config: Optional[ExperimentConfig] = None,
                            log: Optional[DataAccessLog] = None) -> ExperimentReport:
    """
    Baseline plus one report per (generator, factor, classifier, seed).

    Every grid point uses seeds derived from ``(config.seed, coordinates)``,
    so serial and threaded runs give the same reports.

    Args:
        prepared: Prepared splits
        generators: Checkpoints by display name
        config: Experiment grid
        log: Access log to record into (a fresh one if omitted)

    Returns:
        ExperimentReport

    Raises:
        SchemaMismatchError: If a checkpoint was trained on another schema
    """
    config = config or ExperimentConfig()
    log = log or DataAccessLog()
    splits = _AuditedSplits(prepared, log)
    schema_hash = prepared.schema.content_hash
    for name, checkpoint in generators.items():
        if checkpoint.schema_hash != schema_hash:
            raise SchemaMismatchError(f"Generator '{name}' was trained on a different schema")

    train = splits.get("train", "augment", "experiment")
    consistency: Dict[str, Dict[str, Optional[float]]] = {}
    synthetic: Dict[Tuple[str, int, int], Dataset] = {}
    for name, checkpoint in generators.items():
        checked = Dataset.concat([
            generate(checkpoint.model, checkpoint.banks,
                     GenerationRequest(condition=label, count=config.consistency_count, k=config.k,
                                       seed=derive_seed(config.seed, "consistency", name),
                                       decode=config.decode),
                     checkpoint.schema)
            for label in CONDITION_LABELS
        ])
        consistency[name] = class_consistency(checked).summary()
        logger.info("Consistency of %s: %s", name, consistency[name])
        for factor in config.factors:
            for s in range(config.seeds):
                seed = derive_seed(config.seed, "experiment", name, factor, s)
                synthetic[(name, factor, s)] = augment(train, checkpoint, factor, seed,
                                                       config.k, config.decode)

    tasks = [("baseline", 1, kind, s) for kind in config.classifiers for s in range(config.seeds)]
    tasks += [
        (name, factor, kind, s)
        for name in generators for factor in config.factors
        for kind in config.classifiers for s in range(config.seeds)
    ]

    def run(task) -> Tuple[EvalReport, List[AccessRecord]]:
        name, factor, kind, s = task
        actor = f"{name}/x{factor}/{kind}/{s}"
        task_log = DataAccessLog()
        audited = _AuditedSplits(prepared, task_log)
        logger.info("Grid point %s", actor)
        fit_on = audited.get("train", "fit", actor)
        extra = synthetic.get((name, factor, s))
        if extra is not None:
            fit_on = Dataset.concat([fit_on, extra])
        fitted = train_classifier(kind, fit_on, audited.get("validation", "tune", actor),
                                  config.grid(kind), seed=derive_seed(config.seed, kind, s))
        scores = _score(fitted, audited.get("test", "score", actor))
        report = EvalReport(
            generator=name,
            factor=factor,
            classifier=kind,
            seed=s,
            train_size=len(fit_on),
            synthetic_size=0 if extra is None else len(extra),
            f1_risk=scores["f1_1"],
            f1_non_risk=scores["f1_0"],
            f1_weighted=scores["f1_weighted"],
            validation_f1=fitted.validation_f1,
            params=fitted.params,
            consistency=consistency.get(name),
        )
        return report, task_log.records()

    with ThreadPoolExecutor(max_workers=config.threads) as pool:
        results = list(pool.map(run, tasks))
    # merged in task order, whatever order the workers finished in
    for _, records in results:
        log.extend(records)
    reports = [report for report, _ in results]

    return ExperimentReport(
        schema_hash=schema_hash,
        config=config,
        reports=reports,
        consistency=consistency,
        access_log=log.records(),
    )


def render_table(report: ExperimentReport) -> str:
    """
    Aligned text table of median test F1 over seeds.

    Rows are generator/factor (baseline first), columns classifier x
    {F1_risk, F1_weighted}.
    """
    frame = pd.DataFrame([r.model_dump() for r in report.reports])
    frame["row"] = [
        "baseline" if g == "baseline" else f"{g} x{f}"
        for g, f in zip(frame["generator"], frame["factor"])
    ]
    table = frame.pivot_table(index="row", columns="classifier", values=["f1_risk", "f1_weighted"],
                              aggfunc="median", sort=False)
    table = table.rename(columns={"f1_risk": "F1_risk", "f1_weighted": "F1_weighted"})
    table = table.swaplevel(axis=1).sort_index(axis=1, level=0, sort_remaining=False)
    table.columns = [f"{kind} {metric}" for kind, metric in table.columns]
    table.index.name = None
    return table.to_string(float_format=lambda v: f"{v:.4f}")


def write_report(report: ExperimentReport, path: Union[str, Path]) -> Dict[str, Path]:
    """Write ``report.json`` and the text table next to it (``<stem>.txt``)."""
    out = Path(path)
    table = out.with_suffix(".txt")
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(report.to_json() + "\n")
        table.write_text(render_table(report) + "\n")
    except OSError as e:
        raise IoError(f"Cannot write report to {out}: {e}")
    return {"report": out, "table": table}
