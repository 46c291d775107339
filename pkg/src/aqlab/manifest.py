"""Stimulus naming convention, directory index, and the batch manifest.

File layout: ``<item>__ref.wav``, ``<item>__anchor35.wav``,
``<item>__anchor70.wav``, and ``<item>__<METHOD>__<LEVEL>.wav``; reference
and anchors are shared by every method of an item. Each generated file
carries a ``.json`` sidecar with its parameters and seed.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ManifestError, ValidationError
from .params import ProcessingMethod, QualityLevel

__all__ = [
    "CONDITIONS",
    "QUALITY_CONDITIONS",
    "SHARED_CONDITIONS",
    "condition_filename",
    "ManifestEntry",
    "read_batch_manifest",
    "StimulusIndex",
]

SHARED_CONDITIONS = ("reference", "anchor35", "anchor70")
QUALITY_CONDITIONS = ("Q1", "Q2", "Q3", "Q4", "Q5")
CONDITIONS = SHARED_CONDITIONS + QUALITY_CONDITIONS


def condition_filename(item_id: str, condition: str, method: ProcessingMethod | None = None) -> str:
    if condition == "reference":
        return f"{item_id}__ref.wav"
    if condition in ("anchor35", "anchor70"):
        return f"{item_id}__{condition}.wav"
    if condition in QUALITY_CONDITIONS:
        if method is None:
            raise ValidationError("quality conditions need a method for their filename")
        return f"{item_id}__{method.value}__{condition}.wav"
    raise ValidationError(f"unknown condition {condition!r}")


@dataclass(frozen=True)
class ManifestEntry:
    item_id: str
    path: Path
    methods: tuple[ProcessingMethod, ...]


def read_batch_manifest(path: str | Path) -> list[ManifestEntry]:
    """Batch manifest CSV: item_id,path,methods with a semicolon method list."""
    entries = []
    seen = set()
    base = Path(path).parent
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        required = {"item_id", "path", "methods"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise ValidationError(f"{path}: manifest must have columns {sorted(required)}")
        for line, row in enumerate(reader, start=2):
            item_id = row["item_id"].strip()
            if not item_id or "__" in item_id:
                raise ValidationError(
                    f"{path}:{line}: item ids must be nonempty and free of '__', got {item_id!r}"
                )
            if item_id in seen:
                raise ValidationError(f"{path}:{line}: duplicate item {item_id!r}")
            seen.add(item_id)
            try:
                methods = tuple(
                    ProcessingMethod(m.strip()) for m in row["methods"].split(";") if m.strip()
                )
            except ValueError as exc:
                raise ValidationError(f"{path}:{line}: {exc}") from None
            if not methods:
                raise ValidationError(f"{path}:{line}: no methods listed")
            item_path = Path(row["path"])
            if not item_path.is_absolute():
                item_path = base / item_path
            entries.append(ManifestEntry(item_id, item_path, methods))
    if not entries:
        raise ValidationError(f"{path}: empty manifest")
    return entries


@dataclass
class StimulusIndex:
    """What exists in a stimulus directory: (item, method) pairs plus shared files."""

    root: Path
    pairs: dict[tuple[str, ProcessingMethod], dict[str, Path]] = field(default_factory=dict)
    shared: dict[str, dict[str, Path]] = field(default_factory=dict)  # item -> condition -> path

    @classmethod
    def from_directory(cls, root: str | Path) -> "StimulusIndex":
        root = Path(root)
        if not root.is_dir():
            raise ManifestError(f"stimulus directory {root} does not exist")
        index = cls(root=root)
        for path in sorted(root.glob("*.wav")):
            parts = path.stem.split("__")
            if len(parts) == 2:
                item_id, tag = parts
                condition = "reference" if tag == "ref" else tag
                if condition in SHARED_CONDITIONS:
                    index.shared.setdefault(item_id, {})[condition] = path
            elif len(parts) == 3:
                item_id, method_name, level = parts
                try:
                    method = ProcessingMethod(method_name)
                    QualityLevel(level)
                except ValueError:
                    continue
                index.pairs.setdefault((item_id, method), {})[level] = path
        return index

    @property
    def items(self) -> list[str]:
        return sorted({item for item, _ in self.pairs})

    def missing_files(self) -> list[str]:
        """Names required for completeness that are absent from the index."""
        missing = []
        for (item_id, method), levels in sorted(self.pairs.items()):
            for level in QUALITY_CONDITIONS:
                if level not in levels:
                    missing.append(condition_filename(item_id, level, method))
            for condition in SHARED_CONDITIONS:
                if condition not in self.shared.get(item_id, {}):
                    missing.append(condition_filename(item_id, condition))
        return sorted(set(missing))

    def condition_path(self, item_id: str, method: ProcessingMethod, condition: str) -> Path:
        if condition in SHARED_CONDITIONS:
            try:
                return self.shared[item_id][condition]
            except KeyError:
                raise ManifestError(
                    f"missing {condition_filename(item_id, condition)} in {self.root}"
                ) from None
        try:
            return self.pairs[(item_id, method)][condition]
        except KeyError:
            raise ManifestError(
                f"missing {condition_filename(item_id, condition, method)} in {self.root}"
            ) from None
