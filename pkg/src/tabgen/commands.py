"""Pipeline commands shared by the CLI and the tool server.

Each command reads its inputs, writes its outputs plus a run manifest and
returns a JSON-friendly summary. Commands are deterministic functions of
their inputs, flags and seed.
"""

import json
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

from tabgen.benchmark import BenchConfig, generate_benchmark, write_benchmark
from tabgen.data.pipeline import PrepareConfig, load_prepared, prepare, read_raw_csv, write_prepared
from tabgen.data.schema import RawSchema, load_schema
from tabgen.data.split import SplitSpec
from tabgen.errors import ConfigError, IoError, SchemaError
from tabgen.evaluation.experiment import ExperimentConfig, augmentation_experiment, write_report
from tabgen.manifest import ManifestRecorder
from tabgen.registry import get_model_registry
from tabgen.sampling.generate import GenerationRequest, generate, write_synthetic
from tabgen.seeding import sha256_file
from tabgen.training.checkpoint import save_checkpoint
from tabgen.training.config import TrainingConfig, load_training_config
from tabgen.training.trainer import train

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def parse_fractions(text: str) -> SplitSpec:
    """``"test,validation"`` fractions, e.g. ``"0.2,0.2"``."""
    try:
        test, validation = (float(part) for part in text.split(","))
    except ValueError:
        raise ConfigError(f"--split expects two comma-separated fractions, got '{text}'")
    return SplitSpec(test_fraction=test, validation_fraction=validation)


def _sidecar(path: Path, suffix: str) -> Path:
    return path.with_name(path.name + suffix)


def cmd_benchmark(out: PathLike, patients: int = 811, seed: int = 0, informative: int = 8,
                  noise: int = 20, missing_rate: float = 0.2) -> Dict[str, str]:
    """Write ``raw.csv``, ``schema.json`` and ``manifest.json`` into ``out``."""
    cfg = BenchConfig(patients=patients, informative=informative, noise=noise,
                      missing_rate=missing_rate, seed=seed)
    out = Path(out)
    with ManifestRecorder("benchmark", {"out": out, **cfg.model_dump()}, seed=seed) as rec:
        frame, schema = generate_benchmark(cfg)
        paths = write_benchmark(frame, schema, out)
        rec.config("bench", cfg.model_dump_json())
        rec.outputs(paths.values())
    paths["manifest"] = rec.write(out / "manifest.json")
    return {name: str(p) for name, p in paths.items()}


def cmd_prepare(schema: PathLike, input: PathLike, out: PathLike, split: str = "0.2,0.2",
                seed: int = 0, n_bins: int = 5, ergometry_bins: int = 10,
                prune_threshold: float = 0.9) -> Dict[str, object]:
    """Derive, split, discretize, prune and encode a raw CSV into ``out``."""
    raw_schema = load_schema(schema)
    if not isinstance(raw_schema, RawSchema):
        raise SchemaError(f"{schema} is a prepared schema; prepare needs a raw schema")
    split_spec = parse_fractions(split).model_copy(update={"seed": seed})
    config = PrepareConfig(n_bins=n_bins, ergometry_bins=ergometry_bins,
                           prune_threshold=prune_threshold, split=split_spec)
    out = Path(out)
    with ManifestRecorder("prepare", {"schema": schema, "input": input, "out": out, "split": split,
                                      "n_bins": n_bins, "ergometry_bins": ergometry_bins,
                                      "prune_threshold": prune_threshold}, seed=seed) as rec:
        rec.inputs([schema, input])
        prepared = prepare(read_raw_csv(input), raw_schema, config)
        paths = write_prepared(prepared, out)
        rec.config("prepare", config.model_dump_json())
        rec.outputs(paths.values())
    rec.write(out / "manifest.json")
    return {"out": str(out), "summary": prepared.summary(), "removed": prepared.removed}


def cmd_train(data: PathLike, out: PathLike, config: Optional[PathLike] = None,
              seed: Optional[int] = None, variant: Optional[str] = None,
              epochs: Optional[int] = None) -> Dict[str, object]:
    """Train on a prepared directory; write the checkpoint, history and manifest."""
    overrides = {"seed": seed, "variant": variant, "epochs": epochs}
    if config is not None:
        training = load_training_config(config, **overrides)
    else:
        given = {k: v for k, v in overrides.items() if v is not None}
        training = TrainingConfig.model_validate(given)
    prepared = load_prepared(data)
    out = Path(out)
    data_dir = Path(data)
    inputs = [data_dir / name for name in ("schema.json", "train.csv", "val.csv")]
    with ManifestRecorder("train", {"data": data, "config": config, "out": out,
                                    "variant": training.variant}, seed=training.seed) as rec:
        rec.inputs(inputs + ([Path(config)] if config else []))
        rec.config("training", training.to_json())
        checkpoint, history = train(prepared.train, training, validation=prepared.validation)
        save_checkpoint(checkpoint, out)
        history_path = out.with_name(out.stem + ".history.json")
        try:
            payload = history.model_dump(mode="json", by_alias=True)
            history_path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        except OSError as e:
            raise IoError(f"Cannot write {history_path}: {e}")
        rec.outputs([out, history_path])
    rec.write(_sidecar(out, ".manifest.json"))
    return {
        "checkpoint": str(out),
        "history": str(history_path),
        "epochs_run": len(history.epochs),
        "best_epoch": history.best_epoch,
        "stopped_early": history.stopped_early,
    }


def cmd_generate(model: PathLike, condition: str, count: int, out: PathLike, k: int = 5,
                 seed: int = 0, decode: str = "sample", sampler: str = "smote",
                 latent_source: str = "mean", threads: int = 1) -> Dict[str, object]:
    """Generate one class of synthetic records; write CSV, provenance and manifest."""
    request = GenerationRequest(condition=condition, count=count, k=k, seed=seed, decode=decode,
                                sampler=sampler, latent_source=latent_source)
    checkpoint = get_model_registry().get(model)
    out = Path(out)
    with ManifestRecorder("generate", {"model": model, "out": out, **request.model_dump()},
                          seed=seed) as rec:
        rec.inputs([model])
        synthetic = generate(checkpoint.model, checkpoint.banks, request, checkpoint.schema,
                             threads)
        provenance = {
            "checkpoint": str(model),
            "checkpoint_sha256": sha256_file(model),
            "schema_hash": checkpoint.schema_hash,
            "variant": checkpoint.config.variant,
            "request": request.model_dump(),
        }
        paths = write_synthetic(synthetic, out, provenance)
        rec.outputs(paths.values())
    rec.write(_sidecar(out, ".manifest.json"))
    return {
        "data": str(paths["data"]),
        "provenance": str(paths["provenance"]),
        "rows": len(synthetic),
    }


def _generator_names(models: Sequence[PathLike], checkpoints: List) -> List[str]:
    variants = [c.config.variant for c in checkpoints]
    return [
        v if variants.count(v) == 1 else f"{v}:{Path(m).stem}" for v, m in zip(variants, models)
    ]


def cmd_evaluate(data: PathLike, models: Sequence[PathLike], out: PathLike,
                 factors: Sequence[int] = (2, 5),
                 classifiers: Sequence[str] = ("logreg", "mlp", "random_forest"),
                 seeds: int = 5, seed: int = 0, k: int = 5, consistency_count: int = 500,
                 threads: int = 1) -> Dict[str, object]:
    """Run the augmentation experiment; write the JSON report, text table and manifest."""
    if not models:
        raise ConfigError("evaluate needs at least one --model")
    config = ExperimentConfig(factors=list(factors), classifiers=list(classifiers), seeds=seeds,
                              seed=seed, k=k, consistency_count=consistency_count, threads=threads)
    prepared = load_prepared(data)
    registry = get_model_registry()
    checkpoints = [registry.get(m) for m in models]
    generators = dict(zip(_generator_names(models, checkpoints), checkpoints))
    out = Path(out)
    data_dir = Path(data)
    with ManifestRecorder("evaluate", {"data": data, "models": list(models), "out": out,
                                       **config.model_dump(exclude={"grids"})}, seed=seed) as rec:
        rec.inputs([data_dir / n for n in ("schema.json", "train.csv", "val.csv", "test.csv")])
        rec.inputs(models)
        rec.config("experiment", config.model_dump_json())
        report = augmentation_experiment(prepared, generators, config)
        paths = write_report(report, out)
        rec.outputs(paths.values())
    rec.write(_sidecar(out, ".manifest.json"))
    return {
        "report": str(paths["report"]),
        "table": str(paths["table"]),
        "entries": len(report.reports),
        "consistency": report.consistency,
    }
