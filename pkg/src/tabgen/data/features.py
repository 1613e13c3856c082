"""Derived clinical features: BMI, weeks since program start, risk label."""

import logging
from typing import Iterable, List, Optional

import numpy as np
import pandas as pd

from tabgen.data.schema import CONDITION_LABELS, ERGOMETRY_VARIABLES, ergometry_columns

logger = logging.getLogger(__name__)

IMPROVEMENT_THRESHOLD = 0.15
# slack for ratios such as (1.15 - 1) / 1 that land just below the threshold
RATIO_TOLERANCE = 1e-9
PROGRAM_START = "program_start_date"
CONDITION_COLUMN = "risk"
DATE_SUFFIX = "_date"


def improvement_flag(start: Optional[float], end: Optional[float],
                     threshold: float = IMPROVEMENT_THRESHOLD) -> Optional[bool]:
    """
    Whether ``(end - start) / start >= threshold``, up to ``RATIO_TOLERANCE``.

    Returns None (indeterminate) when either value is absent or start is 0.
    """
    if start is None or end is None or pd.isna(start) or pd.isna(end) or start == 0:
        return None
    return bool((end - start) / start >= threshold - RATIO_TOLERANCE)


def risk_from_flags(flags: Iterable[Optional[bool]]) -> Optional[int]:
    """
    Condition label from improvement flags: 1 (risk) iff no determinate flag is true.

    Returns None when every flag is indeterminate.
    """
    known = [f for f in flags if f is not None]
    if not known:
        return None
    return 0 if any(known) else 1


def flag_column(variable: str) -> str:
    return f"{variable}_improved"


def weeks_column(date_column: str) -> str:
    return date_column[: -len(DATE_SUFFIX)] + "_weeks"


def derive_features(frame: pd.DataFrame, date_columns: Optional[List[str]] = None) -> pd.DataFrame:
    """
    Add derived features and the condition label; drop unusable records.

    Adds ``bmi`` (weight_kg / height_m^2) when both inputs exist, one
    ``<event>_weeks`` column per ``<event>_date`` column (whole weeks since
    ``program_start_date``), one ``<variable>_improved`` flag per ergometry
    variable present, and the ``risk`` label (label 'risk' iff no flag is
    true). Records whose four flags are all indeterminate are rejected.

    Args:
        frame: Raw records
        date_columns: Date columns to convert (default: every ``*_date`` column)

    Returns:
        Augmented copy of the frame without the rejected records
    """
    out = frame.copy()

    if {"weight_kg", "height_m"} <= set(out.columns):
        weight = pd.to_numeric(out["weight_kg"], errors="coerce")
        height = pd.to_numeric(out["height_m"], errors="coerce")
        out["bmi"] = weight / (height * height)

    if date_columns is None:
        date_columns = [c for c in out.columns if c.endswith(DATE_SUFFIX)]
    if PROGRAM_START in out.columns:
        start = pd.to_datetime(out[PROGRAM_START], errors="coerce", format="ISO8601")
        for column in date_columns:
            if column == PROGRAM_START:
                continue
            event = pd.to_datetime(out[column], errors="coerce", format="ISO8601")
            out[weeks_column(column)] = np.floor((event - start).dt.days / 7.0)
        out = out.drop(columns=[c for c in date_columns if c in out.columns])

    flag_names = []
    for variable in ERGOMETRY_VARIABLES:
        start_col, end_col = ergometry_columns(variable)
        if start_col not in out.columns or end_col not in out.columns:
            continue
        starts = pd.to_numeric(out[start_col], errors="coerce")
        ends = pd.to_numeric(out[end_col], errors="coerce")
        flags = [improvement_flag(s, e) for s, e in zip(starts, ends)]
        out[flag_column(variable)] = pd.array(flags, dtype="boolean")
        flag_names.append(flag_column(variable))

    labels = [
        risk_from_flags(None if pd.isna(v) else bool(v) for v in row)
        for row in out[flag_names].itertuples(index=False)
    ]
    keep = np.array([label is not None for label in labels], dtype=bool)
    rejected = int((~keep).sum())
    if rejected:
        logger.info("Rejected %d record(s) without any complete ergometry pair", rejected)

    out[CONDITION_COLUMN] = [
        CONDITION_LABELS[label] if label is not None else None for label in labels
    ]
    return out.loc[keep].reset_index(drop=True)
