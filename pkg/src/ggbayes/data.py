"""Lifetime datasets: the validated container and file/builtin loading."""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

__all__ = ["Dataset", "MEEKER_ID", "load_dataset"]

# Lifetimes (hours) of 30 units from an industrial reliability experiment,
# used throughout as the reference dataset. Eight units recorded exactly 300;
# the source reports all values as exact lifetimes and they are treated as
# such here (no censoring model).
_MEEKER_VALUES = (
    275.0, 13.0, 147.0, 23.0, 181.0, 30.0, 65.0, 10.0, 300.0, 173.0,
    106.0, 300.0, 300.0, 212.0, 300.0, 300.0, 300.0, 2.0, 261.0, 293.0,
    88.0, 274.0, 28.0, 143.0, 300.0, 23.0, 300.0, 80.0, 245.0, 266.0,
)

MEEKER_ID = "meeker"


@dataclass(frozen=True)
class Dataset:
    """Nonempty vector of positive lifetimes with cached log statistics.

    Attributes
    ----------
    values : ndarray
        The lifetimes, in the order given.
    n : int
        Number of observations.
    log_values : ndarray
        Elementwise natural logs, cached because every posterior
        evaluation needs them.
    sum_log : float
        Sum of log_values.
    """

    values: np.ndarray
    n: int = field(init=False)
    log_values: np.ndarray = field(init=False)
    sum_log: float = field(init=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("Dataset requires a nonempty 1-D vector of lifetimes")
        if not np.all(np.isfinite(v)):
            raise ValueError("Dataset values must all be finite")
        if np.any(v <= 0.0):
            raise ValueError("Dataset values must all be > 0")
        v = v.copy()
        v.setflags(write=False)
        logs = np.log(v)
        logs.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "n", int(v.size))
        object.__setattr__(self, "log_values", logs)
        object.__setattr__(self, "sum_log", float(logs.sum()))


def meeker_dataset() -> Dataset:
    """The built-in 30-unit reliability dataset."""
    return Dataset(np.array(_MEEKER_VALUES))


def load_dataset(source) -> Dataset:
    """Load lifetimes from a file path or the builtin id "meeker".

    Files hold one positive real per line; a single leading header line
    "t" (bare or as a one-column CSV header) is permitted and skipped.
    Raises ValueError naming the offending line on parse or sign errors,
    and FileNotFoundError for missing paths.
    """
    if isinstance(source, str) and source.strip().lower() == MEEKER_ID:
        return meeker_dataset()
    path = os.fspath(source)
    if not os.path.exists(path):
        raise FileNotFoundError(f"dataset file not found: {path}")
    values = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            text = raw.strip()
            if not text:
                continue
            if lineno == 1 and text.lower().lstrip("﻿") == "t":
                continue
            try:
                value = float(text)
            except ValueError:
                raise ValueError(f"{path}:{lineno}: cannot parse {text!r} as a real number") from None
            if not np.isfinite(value) or value <= 0.0:
                raise ValueError(f"{path}:{lineno}: lifetimes must be positive, got {text!r}")
            values.append(value)
    if not values:
        raise ValueError(f"{path}: no data lines found")
    return Dataset(np.array(values))
