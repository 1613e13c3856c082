"""Synthetic rehabilitation-like corpus with a known ground truth.

Each patient has a latent health factor f ~ N(0, 1). Informative features
are noisy linear functions of f; ergometry start values grow with f; the
chance that at least one ergometry variable improves by 15% or more is
sigmoid(1.2 f + 0.3). Noise features carry no signal. Values are masked
independently at the configured rate, but at least one complete ergometry
pair that witnesses the label is always kept.

Published constants (see ``INFORMATIVE_COEFFICIENTS`` and ``ERGOMETRY_BASE``)
make every oracle on this corpus reproducible.
"""

import logging
from pathlib import Path
from typing import Dict, List, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field
from scipy.special import expit

from tabgen.data.features import CONDITION_COLUMN, PROGRAM_START
from tabgen.data.schema import (
    CONDITION_LABELS,
    ERGOMETRY_VARIABLES,
    RawColumn,
    RawSchema,
    ergometry_columns,
    save_schema,
)
from tabgen.errors import IoError
from tabgen.seeding import rng

logger = logging.getLogger(__name__)

INFORMATIVE_COEFFICIENTS = (1.0, -0.8, 0.6, 0.9, -0.5, 0.7, -1.1, 0.4, 0.8, -0.6, 0.5, -0.9)
INFORMATIVE_NOISE = 0.5

# log-scale baselines: VO2 peak ~20 ml/kg/min, ~100 W, ~6 METs, ~8 min
ERGOMETRY_BASE = {"vo2_peak": 3.0, "watts": 4.6, "mets": 1.8, "duration": 2.1}
ERGOMETRY_FACTOR_SLOPE = 0.3
ERGOMETRY_NOISE = 0.1

IMPROVE_SLOPE = 1.2
IMPROVE_OFFSET = 0.3
IMPROVING_DELTA = (0.30, 0.80)
FLAT_DELTA = (-0.15, 0.05)

NOISE_CATEGORIES = ("c0", "c1", "c2", "c3")
SEX_CATEGORIES = ("F", "M")
DATE_COLUMNS = (PROGRAM_START, "program_end_date", "followup_date")


class BenchConfig(BaseModel):
    """Size and seed of the generated corpus."""

    patients: int = Field(default=811, ge=50)
    informative: int = Field(default=8, ge=1, le=len(INFORMATIVE_COEFFICIENTS))
    noise: int = Field(default=20, ge=0)
    missing_rate: float = Field(default=0.2, ge=0.0, lt=0.9)
    seed: int = 0


def non_risk_probability(factor: np.ndarray) -> np.ndarray:
    """P(some ergometry variable improves by at least 15%) given the health factor."""
    return expit(IMPROVE_SLOPE * np.asarray(factor) + IMPROVE_OFFSET)


def bench_schema(cfg: BenchConfig) -> RawSchema:
    """Raw schema of the corpus generated for ``cfg``."""
    columns: List[RawColumn] = [
        RawColumn(name="age", kind="continuous"),
        RawColumn(name="sex", kind="binary", categories=list(SEX_CATEGORIES)),
        RawColumn(name="weight_kg", kind="continuous"),
        RawColumn(name="height_m", kind="continuous"),
    ]
    columns += [RawColumn(name=f"x_{i + 1}", kind="continuous") for i in range(cfg.informative)]
    columns += [
        RawColumn(name=f"noise_{i + 1}", kind="categorical", categories=list(NOISE_CATEGORIES))
        for i in range(cfg.noise)
    ]
    columns += [RawColumn(name=name, kind="date") for name in DATE_COLUMNS]
    for variable in ERGOMETRY_VARIABLES:
        columns += [RawColumn(name=name, kind="continuous") for name in ergometry_columns(variable)]
    columns.append(
        RawColumn(name=CONDITION_COLUMN, kind="binary", role="condition",
                  categories=list(CONDITION_LABELS))
    )
    return RawSchema(attributes=columns)


def _dates(generator: np.random.Generator, n: int) -> Dict[str, np.ndarray]:
    offsets = generator.integers(0, 5 * 365, size=n).astype("timedelta64[D]")
    start = np.datetime64("2015-01-05") + offsets
    end = start + (7 * generator.integers(8, 17, size=n)).astype("timedelta64[D]")
    followup = end + (7 * generator.integers(20, 33, size=n)).astype("timedelta64[D]")
    return {name: np.datetime_as_string(v, unit="D").astype(object)
            for name, v in zip(DATE_COLUMNS, (start, end, followup))}


def _ergometry(generator: np.random.Generator, factor: np.ndarray, improved: np.ndarray,
               mask_rate: float) -> Tuple[Dict[str, np.ndarray], np.ndarray]:
    """Start/end values per variable plus the per-(row, variable) keep mask."""
    n, v = factor.shape[0], len(ERGOMETRY_VARIABLES)
    leader = generator.integers(0, v, size=n)
    extra = generator.random((n, v)) < 0.5
    improving = improved[:, None] & (extra | (np.arange(v)[None, :] == leader[:, None]))

    delta = np.where(
        improving,
        generator.uniform(*IMPROVING_DELTA, size=(n, v)),
        generator.uniform(*FLAT_DELTA, size=(n, v)),
    )
    columns: Dict[str, np.ndarray] = {}
    keep = np.ones((n, v, 2), dtype=bool)
    for j, variable in enumerate(ERGOMETRY_VARIABLES):
        base = ERGOMETRY_BASE[variable]
        jitter = generator.normal(0.0, ERGOMETRY_NOISE, n)
        start = np.exp(ERGOMETRY_FACTOR_SLOPE * factor + base + jitter)
        start_col, end_col = ergometry_columns(variable)
        columns[start_col] = np.round(start, 4)
        columns[end_col] = np.round(start * (1.0 + delta[:, j]), 4)
    keep &= generator.random((n, v, 2)) >= mask_rate

    complete = keep.all(axis=2)
    witness = np.where(improved[:, None], complete & improving, complete)
    lost = ~witness.any(axis=1)
    # restore the leading (improving) pair when no complete pair witnesses the label
    keep[np.flatnonzero(lost), leader[lost], :] = True
    return columns, keep


def generate_benchmark(cfg: BenchConfig) -> Tuple[pd.DataFrame, RawSchema]:
    """
    Draw the corpus for ``cfg``.

    Returns:
        (raw frame with ISO dates and empty strings for missing cells, raw schema)
    """
    generator = rng(cfg.seed, "bench")
    n = cfg.patients
    factor = generator.standard_normal(n)
    improved = generator.random(n) < non_risk_probability(factor)

    data: Dict[str, np.ndarray] = {
        "age": np.round(60.0 - 5.0 * factor + generator.normal(0.0, 8.0, n), 1),
        "sex": np.where(generator.random(n) < 0.7, "M", "F").astype(object),
        "weight_kg": np.round(generator.normal(80.0, 12.0, n), 1),
        "height_m": np.round(generator.normal(1.72, 0.08, n), 3),
    }
    for i in range(cfg.informative):
        noise = generator.normal(0.0, INFORMATIVE_NOISE, n)
        data[f"x_{i + 1}"] = np.round(INFORMATIVE_COEFFICIENTS[i] * factor + noise, 4)
    for i in range(cfg.noise):
        data[f"noise_{i + 1}"] = np.asarray(NOISE_CATEGORIES, dtype=object)[
            generator.integers(0, len(NOISE_CATEGORIES), n)
        ]
    data.update(_dates(generator, n))

    plain = list(data)
    frame = pd.DataFrame({name: pd.Series(values, dtype=object) for name, values in data.items()})
    masks = generator.random((n, len(plain))) < cfg.missing_rate
    for j, name in enumerate(plain):
        frame.loc[masks[:, j], name] = ""

    ergometry, keep = _ergometry(generator, factor, improved, cfg.missing_rate)
    for j, variable in enumerate(ERGOMETRY_VARIABLES):
        for side, name in enumerate(ergometry_columns(variable)):
            values = pd.Series(ergometry[name], dtype=object)
            values[~keep[:, j, side]] = ""
            frame[name] = values

    frame[CONDITION_COLUMN] = np.where(improved, CONDITION_LABELS[0], CONDITION_LABELS[1])
    schema = bench_schema(cfg)
    frame = frame[schema.names]
    logger.info("Generated benchmark: %d patients, %.1f%% non-risk", n, 100.0 * improved.mean())
    return frame, schema


def write_benchmark(frame: pd.DataFrame, schema: RawSchema,
                    out_dir: Union[str, Path]) -> Dict[str, Path]:
    """Write ``raw.csv`` and ``schema.json`` into ``out_dir``."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        paths = {"raw": out / "raw.csv", "schema": out / "schema.json"}
        frame.to_csv(paths["raw"], index=False, lineterminator="\n")
        save_schema(schema, paths["schema"])
    except OSError as e:
        raise IoError(f"Cannot write benchmark to {out}: {e}")
    return paths
