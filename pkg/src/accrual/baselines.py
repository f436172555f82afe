"""Log-linear extrapolation baseline and forecast-accuracy metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DataError
from .model import DailyCounts

__all__ = [
    "LogLinearFit",
    "MetricReport",
    "fit_log_linear",
    "predict_log_linear",
    "rmse",
    "mape",
    "evaluate_pairs",
]


@dataclass(frozen=True)
class LogLinearFit:
    """OLS coefficients of log(count + 1) on the day index."""

    intercept: float
    slope: float


@dataclass(frozen=True)
class MetricReport:
    """Accuracy summary over (predicted, actual) pairs.

    ``mape_excluded`` counts pairs dropped from the MAPE because their
    actual value is zero.
    """

    rmse: float
    mape: float
    n: int
    mape_excluded: int = 0


def fit_log_linear(data: DailyCounts) -> LogLinearFit:
    """Least squares of log(count + 1) against day 1..d, closed form."""
    if data.d < 2:
        raise DataError("log-linear fit needs at least 2 days; slope is unidentifiable")
    t = np.arange(1, data.d + 1, dtype=float)
    y = np.log1p(np.asarray(data.counts, dtype=float))
    t_bar = t.mean()
    y_bar = y.mean()
    slope = float(np.dot(t - t_bar, y - y_bar) / np.dot(t - t_bar, t - t_bar))
    return LogLinearFit(intercept=float(y_bar - slope * t_bar), slope=slope)


def predict_log_linear(fit: LogLinearFit, week: int, first_period_d: int = 7) -> float:
    """Extrapolated new participants in week ``week`` (week 1 is the fitted
    period): sum of exp(intercept + slope * day) - 1 over the week's days,
    each day clamped at zero."""
    week = int(week)
    if week < 2:
        raise ValueError(f"week must be >= 2, got {week}")
    length = int(first_period_d)
    if length < 1:
        raise ValueError(f"first_period_d must be >= 1, got {length}")
    days = np.arange(length * (week - 1) + 1, length * week + 1, dtype=float)
    daily = np.exp(fit.intercept + fit.slope * days) - 1.0
    return float(np.maximum(daily, 0.0).sum())


def _as_pairs(pairs: Iterable[Sequence[float]]) -> np.ndarray:
    arr = np.asarray(list(pairs), dtype=float)
    if arr.size == 0:
        raise DataError("no (predicted, actual) pairs to score")
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("pairs must be a sequence of (predicted, actual) 2-tuples")
    return arr


def rmse(pairs: Iterable[Sequence[float]]) -> float:
    """Root mean squared error over pairs."""
    arr = _as_pairs(pairs)
    return float(math.sqrt(np.mean((arr[:, 0] - arr[:, 1]) ** 2)))


def mape(pairs: Iterable[Sequence[float]]) -> float:
    """Mean absolute percentage error (in percent), pairs with actual = 0
    excluded."""
    arr = _as_pairs(pairs)
    kept = arr[arr[:, 1] != 0.0]
    if len(kept) == 0:
        raise DataError("MAPE undefined: every pair has actual = 0")
    return float(100.0 * np.mean(np.abs((kept[:, 0] - kept[:, 1]) / kept[:, 1])))


def evaluate_pairs(pairs: Iterable[Sequence[float]]) -> MetricReport:
    """Both metrics over one pair set, with the MAPE exclusion count."""
    arr = _as_pairs(pairs)
    excluded = int((arr[:, 1] == 0.0).sum())
    return MetricReport(
        rmse=rmse(arr),
        mape=mape(arr),
        n=len(arr),
        mape_excluded=excluded,
    )
