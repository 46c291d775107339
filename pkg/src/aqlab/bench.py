"""Objective-metric benchmark: correlate metric scores against subjective means.

Per metric and processing method, metric values pair with listener-mean
subjective scores at (item, quality level) grain; anchor and reference
rows never enter a correlation. The aggregated score is the Fisher-domain
mean of the per-method correlations. Output is a machine-readable CSV and
an SVG heatmap (methods by metrics plus the AGG column).
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .errors import StatsError
from .manifest import QUALITY_CONDITIONS
from .metrics import MetricScore
from .params import ProcessingMethod
from .scores import ScoreRecord
from .stats import fisher_aggregate, pearson

__all__ = ["CorrelationReport", "benchmark", "report_csv", "heatmap_svg"]

METHOD_ORDER = [m for m in ProcessingMethod]


@dataclass
class CorrelationReport:
    metric: str
    per_method_r: dict[str, float] = field(default_factory=dict)
    per_method_n: dict[str, int] = field(default_factory=dict)
    aggregated_r: float | None = None
    warnings: list[str] = field(default_factory=list)
    excluded_rows: int = 0  # anchor/reference metric rows kept out of the pairing


def _subjective_means(records: list[ScoreRecord]) -> dict[tuple, float]:
    """Listener-mean subjective score per (item, method, quality condition)."""
    sums: dict[tuple, list[float]] = {}
    for rec in records:
        if rec.condition not in QUALITY_CONDITIONS:
            continue
        key = (rec.item_id, rec.method.value, rec.condition)
        sums.setdefault(key, []).append(rec.score)
    return {key: float(np.mean(vals)) for key, vals in sums.items()}


def benchmark(
    metric_scores: list[MetricScore],
    subjective: list[ScoreRecord],
    min_pairs: int = 3,
) -> CorrelationReport:
    """Correlation report for one metric's score set."""
    metric_names = {s.metric for s in metric_scores}
    if len(metric_names) != 1:
        raise StatsError(f"benchmark expects one metric per call, got {sorted(metric_names)}")
    metric_name = metric_names.pop()

    means = _subjective_means(subjective)
    report = CorrelationReport(metric=metric_name)

    by_method: dict[str, dict[tuple, float]] = {}
    for score in metric_scores:
        if score.condition not in QUALITY_CONDITIONS:
            report.excluded_rows += 1
            continue
        key = (score.item_id, score.method.value, score.condition)
        by_method.setdefault(score.method.value, {})[key] = score.value

    rs = []
    for method in METHOD_ORDER:
        cells = by_method.get(method.value)
        if not cells:
            continue
        xs, ys, missing = [], [], 0
        for key, value in sorted(cells.items()):
            if key in means:
                xs.append(value)
                ys.append(means[key])
            else:
                missing += 1
        if missing:
            report.warnings.append(
                f"{method.value}: {missing} metric rows had no subjective counterpart"
            )
        if len(xs) < min_pairs:
            report.warnings.append(
                f"{method.value}: only {len(xs)} pairs, correlation unavailable"
            )
            continue
        try:
            r = pearson(xs, ys)
        except StatsError as exc:
            report.warnings.append(f"{method.value}: {exc}")
            continue
        report.per_method_r[method.value] = r
        report.per_method_n[method.value] = len(xs)
        rs.append(r)

    if rs:
        report.aggregated_r = fisher_aggregate(rs)
    else:
        report.warnings.append("no method reached the pair minimum; AGG unavailable")
    return report


def report_csv(reports: list[CorrelationReport]) -> str:
    """Rows ``metric,method,r,n_pairs`` plus one ``metric,AGG,r,`` row each."""
    out = io.StringIO()
    out.write("metric,method,r,n_pairs\n")
    for rep in reports:
        for method in METHOD_ORDER:
            if method.value in rep.per_method_r:
                out.write(
                    f"{rep.metric},{method.value},"
                    f"{rep.per_method_r[method.value]:.6f},{rep.per_method_n[method.value]}\n"
                )
        if rep.aggregated_r is not None:
            out.write(f"{rep.metric},AGG,{rep.aggregated_r:.6f},\n")
    return out.getvalue()


def _cell_color(r: float | None) -> str:
    """Diverging blue-white-red fill over r in [-1, 1]; gray when absent."""
    if r is None:
        return "#d0d0d0"
    t = (max(-1.0, min(1.0, r)) + 1.0) / 2.0
    if t >= 0.5:
        u = (t - 0.5) * 2.0
        rgb = (255, int(round(255 - 155 * u)), int(round(255 - 195 * u)))
    else:
        u = (0.5 - t) * 2.0
        rgb = (int(round(255 - 195 * u)), int(round(255 - 135 * u)), 255)
    return f"#{rgb[0]:02x}{rgb[1]:02x}{rgb[2]:02x}"


def heatmap_svg(reports: list[CorrelationReport]) -> str:
    """Deterministic SVG: one row per metric, columns per method plus AGG."""
    columns = [m.value for m in METHOD_ORDER] + ["AGG"]
    cell_w, cell_h, left, top = 72, 32, 120, 40
    width = left + cell_w * len(columns) + 10
    height = top + cell_h * len(reports) + 10

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'font-family="sans-serif" font-size="12">',
        '<style>text{dominant-baseline:middle}</style>',
    ]
    for c, name in enumerate(columns):
        x = left + c * cell_w + cell_w / 2
        parts.append(f'<text x="{x}" y="{top - 14}" text-anchor="middle">{name}</text>')
    for r_i, rep in enumerate(reports):
        y = top + r_i * cell_h
        parts.append(
            f'<text x="{left - 8}" y="{y + cell_h / 2}" text-anchor="end">{rep.metric}</text>'
        )
        values = [rep.per_method_r.get(c) for c in columns[:-1]] + [rep.aggregated_r]
        for c_i, value in enumerate(values):
            x = left + c_i * cell_w
            parts.append(
                f'<rect x="{x}" y="{y}" width="{cell_w}" height="{cell_h}" '
                f'fill="{_cell_color(value)}" stroke="#808080"/>'
            )
            label = "" if value is None else f"{value:.2f}"
            parts.append(
                f'<text x="{x + cell_w / 2}" y="{y + cell_h / 2}" '
                f'text-anchor="middle">{label}</text>'
            )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
