"""Subjective score records: loading, validation, and post-screening.

The canonical CSV schema is
``listener_id,cohort,session,trial_index,item_id,method,condition,score``.
Published result files with different column names are adapted through a
declarative column mapping (canonical name -> source column), so upstream
schema drift needs a config change, not code.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .errors import ValidationError
from .manifest import CONDITIONS
from .params import ProcessingMethod

__all__ = [
    "Cohort",
    "ScoreRecord",
    "LoadResult",
    "ScreenResult",
    "load_scores",
    "load_column_mapping",
    "post_screen",
]

EXPECTED_TRIALS = 30
CONDITIONS_PER_TRIAL = 8

CANONICAL_COLUMNS = (
    "listener_id",
    "cohort",
    "session",
    "trial_index",
    "item_id",
    "method",
    "condition",
    "score",
)


class Cohort(str, Enum):
    A = "A"
    B1 = "B1"
    B2 = "B2"


@dataclass(frozen=True)
class ScoreRecord:
    listener_id: str
    cohort: Cohort
    session: int
    trial_index: int
    item_id: str
    method: ProcessingMethod
    condition: str
    score: float


@dataclass
class LoadResult:
    records: list[ScoreRecord]
    warnings: list[str]

    def __iter__(self):
        return iter(self.records)


def load_column_mapping(path: str | Path) -> dict[str, str]:
    """Column-mapping config: JSON object canonical column -> source column."""
    mapping = json.loads(Path(path).read_text(encoding="utf-8"))
    unknown = set(mapping) - set(CANONICAL_COLUMNS)
    if unknown:
        raise ValidationError(f"{path}: unknown canonical columns {sorted(unknown)}")
    return {k: str(v) for k, v in mapping.items()}


def _parse_record(row: dict, where: str) -> ScoreRecord:
    try:
        cohort = Cohort(row["cohort"].strip())
    except ValueError:
        raise ValidationError(f"{where}: unknown cohort {row['cohort']!r}") from None
    try:
        method = ProcessingMethod(row["method"].strip())
    except ValueError:
        raise ValidationError(f"{where}: unknown method {row['method']!r}") from None
    condition = row["condition"].strip()
    if condition not in CONDITIONS:
        raise ValidationError(f"{where}: unknown condition {condition!r}")
    try:
        session = int(row["session"])
        trial_index = int(row["trial_index"])
        score = float(row["score"])
    except (TypeError, ValueError):
        raise ValidationError(f"{where}: non-numeric session/trial/score") from None
    if not 1 <= session <= 3:
        raise ValidationError(f"{where}: session must be 1..3, got {session}")
    if not 0.0 <= score <= 100.0:
        raise ValidationError(f"{where}: score must lie in [0, 100], got {score}")
    return ScoreRecord(
        row["listener_id"].strip(), cohort, session, trial_index,
        row["item_id"].strip(), method, condition, score,
    )


def load_scores(
    paths: str | Path | list[str | Path],
    column_mapping: dict[str, str] | None = None,
) -> LoadResult:
    """Load and validate subjective scores; incomplete listeners warn, not fail."""
    if isinstance(paths, (str, Path)):
        paths = [paths]
    records: list[ScoreRecord] = []
    for path in paths:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                raise ValidationError(f"{path}: empty score file")
            for line, raw in enumerate(reader, start=2):
                if column_mapping:
                    row = {canon: raw.get(src) for canon, src in column_mapping.items()}
                    for canon in CANONICAL_COLUMNS:
                        row.setdefault(canon, raw.get(canon))
                else:
                    row = raw
                missing = [c for c in CANONICAL_COLUMNS if row.get(c) in (None, "")]
                if missing:
                    raise ValidationError(f"{path}:{line}: missing columns {missing}")
                records.append(_parse_record(row, f"{path}:{line}"))

    warnings = []
    per_listener: dict[str, set] = {}
    for rec in records:
        per_listener.setdefault(rec.listener_id, set()).add((rec.trial_index, rec.condition))
    expected = EXPECTED_TRIALS * CONDITIONS_PER_TRIAL
    for listener, cells in sorted(per_listener.items()):
        if len(cells) != expected:
            warnings.append(
                f"listener {listener}: {len(cells)} of {expected} expected grades present"
            )
    return LoadResult(records, warnings)


@dataclass
class ScreenResult:
    kept: list[ScoreRecord]
    excluded: list[str]
    failure_rates: dict[str, float]


def post_screen(
    records: list[ScoreRecord],
    reference_threshold: float = 90.0,
    max_failure_rate: float = 0.15,
) -> ScreenResult:
    """Exclude listeners who graded the hidden reference below the threshold
    in more than ``max_failure_rate`` of their trials (strict inequality)."""
    ref_counts: dict[str, list[int]] = {}
    for rec in records:
        if rec.condition == "reference":
            total_fail = ref_counts.setdefault(rec.listener_id, [0, 0])
            total_fail[0] += 1
            if rec.score < reference_threshold:
                total_fail[1] += 1

    rates = {
        listener: fails / total for listener, (total, fails) in ref_counts.items() if total
    }
    excluded = sorted(l for l, rate in rates.items() if rate > max_failure_rate)
    excluded_set = set(excluded)
    kept = [rec for rec in records if rec.listener_id not in excluded_set]
    return ScreenResult(kept, excluded, rates)
