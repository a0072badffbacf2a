"""Evaluation metrics: minimum, median and normalised minimum rates, Jain index."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .allocation import Allocation
from .errors import MetricError


def jain_index(values) -> float:
    """``(sum x)^2 / (r * sum x^2)``; 1 for equal shares, ``1/r`` for a single winner."""
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise MetricError("Jain index of an empty vector")
    if np.any(v < 0) or not np.all(np.isfinite(v)):
        raise MetricError("Jain index needs finite non-negative values")
    top = float(v.max())
    if top == 0.0:
        raise MetricError("Jain index is undefined for an all-zero vector")
    v = v / top  # scale-free; keeps tiny rates from underflowing when squared
    return float(v.sum() ** 2 / (v.size * float(np.dot(v, v))))


@dataclass(frozen=True)
class MetricsReport:
    min_rate: float
    median_rate: float
    normalized_min: float
    jain: float

    def to_dict(self) -> dict:
        return asdict(self)


def report(allocation: Allocation, baseline: Allocation) -> MetricsReport:
    """Metrics of ``allocation``; the minimum is normalised by ``baseline``'s.

    The median of an even count is the mean of the two central values.
    """
    rec = np.asarray(allocation.received, dtype=float)
    base = float(np.min(baseline.received))
    if rec.shape != np.shape(baseline.received):
        raise MetricError("allocation and baseline serve different pair sets")
    if base <= 0:
        raise MetricError("baseline minimum rate is zero; normalisation undefined")
    lo = float(rec.min())
    return MetricsReport(lo, float(np.median(rec)), lo / base, jain_index(rec))


def source_importance(maxmin_by_source) -> float:
    """Jain index of the max-min rate over candidate source locations.

    Lower values (down to ``1/n``) mean the choice of source matters more.
    """
    v = np.asarray(maxmin_by_source, dtype=float).ravel()
    if v.size < 2:
        raise MetricError("source importance needs at least two source locations")
    return jain_index(v)


def mean_ci95(samples) -> tuple[float, float]:
    """Sample mean and normal-approximation 95% half-width."""
    s = np.asarray(samples, dtype=float).ravel()
    if s.size == 0:
        raise MetricError("no samples")
    if s.size == 1:
        return float(s[0]), 0.0
    return float(s.mean()), float(1.959963984540054 * s.std(ddof=1) / np.sqrt(s.size))
