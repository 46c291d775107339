"""Descriptive statistics and correlation primitives for the benchmark.

Means carry Student-t 95% confidence intervals (standard MUSHRA
reporting); Pearson correlations aggregate across processing methods
through Fisher's z-transform: the coefficients are averaged after
``atanh`` and mapped back with ``tanh``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import stats as sps

from .errors import StatsError
from .scores import ScoreRecord

__all__ = ["ConditionStats", "mean_ci", "pearson", "fisher_aggregate", "cohort_compare"]

GROUPABLE_FIELDS = ("method", "condition", "item_id", "cohort", "listener_id", "session")


@dataclass(frozen=True)
class ConditionStats:
    key: tuple
    n: int
    mean: float
    ci95_low: float
    ci95_high: float
    degenerate: bool = False  # single observation: CI collapses to the mean


def _field(rec: ScoreRecord, name: str):
    value = getattr(rec, name)
    return value.value if hasattr(value, "value") else value


def mean_ci(records: Iterable[ScoreRecord], group_by: Sequence[str]) -> list[ConditionStats]:
    """Group records and report mean with a Student-t 95% CI per group."""
    for name in group_by:
        if name not in GROUPABLE_FIELDS:
            raise StatsError(f"cannot group by {name!r} (have {GROUPABLE_FIELDS})")
    groups: dict[tuple, list[float]] = {}
    for rec in records:
        key = tuple(_field(rec, name) for name in group_by)
        groups.setdefault(key, []).append(rec.score)

    out = []
    for key in sorted(groups):
        scores = np.asarray(groups[key])
        n = len(scores)
        mean = float(np.mean(scores))
        if n == 1:
            out.append(ConditionStats(key, 1, mean, mean, mean, degenerate=True))
            continue
        half = float(sps.t.ppf(0.975, n - 1) * np.std(scores, ddof=1) / np.sqrt(n))
        out.append(ConditionStats(key, n, mean, mean - half, mean + half))
    return out


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Sample Pearson correlation; undefined for constant or short inputs."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise StatsError("pearson needs two equal-length 1-D sequences")
    if len(x) < 3:
        raise StatsError(f"pearson needs at least 3 points, got {len(x)}")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(np.dot(dx, dx))
    syy = float(np.dot(dy, dy))
    if sxx == 0.0 or syy == 0.0:
        raise StatsError("pearson is undefined for a constant sequence")
    r = float(np.dot(dx, dy) / np.sqrt(sxx * syy))
    return min(1.0, max(-1.0, r))


def fisher_aggregate(rs: Sequence[float]) -> float:
    """tanh of the mean atanh: the aggregated correlation across methods."""
    rs = np.asarray(rs, dtype=np.float64)
    if rs.size == 0:
        raise StatsError("fisher_aggregate needs at least one correlation")
    if np.any(np.abs(rs) > 1.0):
        raise StatsError("correlations must lie in [-1, 1]")
    if np.any(np.abs(rs) == 1.0):
        warnings.warn("saturated correlation clamped to +-0.999999 for aggregation")
        rs = np.clip(rs, -0.999999, 0.999999)
    return float(np.tanh(np.mean(np.arctanh(rs))))


def cohort_compare(records: list[ScoreRecord]) -> dict[str, list[ConditionStats]]:
    """Per-cohort method/level means plus the anchor-in-context table.

    The context table splits anchor grades by whether the anchor appeared
    inside an LP trial (where it is one more step of the cutoff scale) or
    inside another method's trial (where it acts as a pure anchor).
    """
    by_cohort = mean_ci(records, ("cohort", "method", "condition"))

    anchor_rows: dict[tuple, list[float]] = {}
    for rec in records:
        if rec.condition not in ("anchor35", "anchor70"):
            continue
        context = "within-LP" if rec.method.value == "LP" else "within-other"
        anchor_rows.setdefault((rec.cohort.value, rec.condition, context), []).append(rec.score)

    anchor_stats = []
    for key in sorted(anchor_rows):
        scores = np.asarray(anchor_rows[key])
        n = len(scores)
        mean = float(np.mean(scores))
        if n == 1:
            anchor_stats.append(ConditionStats(key, 1, mean, mean, mean, degenerate=True))
        else:
            half = float(sps.t.ppf(0.975, n - 1) * np.std(scores, ddof=1) / np.sqrt(n))
            anchor_stats.append(ConditionStats(key, n, mean, mean - half, mean + half))
    return {"by_cohort": by_cohort, "anchor_context": anchor_stats}
