"""Batch stimulus generation: job planning, worker pool, sidecar metadata.

Every output is a pure function of (input file, method, level, master
seed), so a rerun with the same seed reproduces the directory bit for
bit. Each WAV gets a ``.json`` sidecar recording the generator
parameters and the derived seed; sidecars carry no timestamps.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .errors import AqlabError, GenerationError
from .generate import (
    ANCHOR_CUTOFFS,
    generate_anchor,
    generate_condition,
    generate_reference,
    remix_de,
)
from .manifest import (
    QUALITY_CONDITIONS,
    SHARED_CONDITIONS,
    ManifestEntry,
    condition_filename,
)
from .params import DeParams, ProcessingMethod, QualityLevel, params_for
from .waveio import read_wav, write_wav

__all__ = ["GenerationJob", "JobResult", "condition_seed", "plan_jobs", "run_jobs"]


def condition_seed(master_seed: int, item_id: str, method: str, level: str) -> int:
    """Stable per-condition seed, independent of batch composition or order."""
    digest = hashlib.sha256(f"{item_id}|{method}|{level}".encode("utf-8")).digest()
    return (int(master_seed) * 0x1_0000_0001 + int.from_bytes(digest[:6], "big")) % 2**63


@dataclass(frozen=True)
class GenerationJob:
    item_id: str
    condition: str  # reference | anchor35 | anchor70 | Q1..Q5
    method: ProcessingMethod | None
    input_path: Path
    output_path: Path
    seed: int
    target_lufs: float = -23.0
    dialogue_path: Path | None = None  # DE stems
    background_path: Path | None = None


@dataclass
class JobResult:
    job: GenerationJob
    ok: bool
    error: str = ""
    clip_count: int = 0


def plan_jobs(
    entries: list[ManifestEntry],
    out_dir: Path,
    master_seed: int,
    methods: list[ProcessingMethod] | None = None,
    levels: list[QualityLevel] | None = None,
    stems_dir: Path | None = None,
    target_lufs: float = -23.0,
) -> list[GenerationJob]:
    """Expand a batch manifest into per-file jobs (shared files planned once)."""
    out_dir = Path(out_dir)
    jobs: list[GenerationJob] = []
    wanted_levels = levels or list(QualityLevel)
    for entry in entries:
        for condition in SHARED_CONDITIONS:
            jobs.append(GenerationJob(
                item_id=entry.item_id,
                condition=condition,
                method=None,
                input_path=entry.path,
                output_path=out_dir / condition_filename(entry.item_id, condition),
                seed=condition_seed(master_seed, entry.item_id, "-", condition),
                target_lufs=target_lufs,
            ))
        for method in entry.methods:
            if methods and method not in methods:
                continue
            for level in wanted_levels:
                job = GenerationJob(
                    item_id=entry.item_id,
                    condition=level.value,
                    method=method,
                    input_path=entry.path,
                    output_path=out_dir / condition_filename(entry.item_id, level.value, method),
                    seed=condition_seed(master_seed, entry.item_id, method.value, level.value),
                    target_lufs=target_lufs,
                )
                if method is ProcessingMethod.DE:
                    stem_root = Path(stems_dir) if stems_dir else None
                    if stem_root is not None:
                        job = dataclasses.replace(
                            job,
                            dialogue_path=stem_root / f"{entry.item_id}__{level.value}__dialogue.wav",
                            background_path=stem_root / f"{entry.item_id}__{level.value}__background.wav",
                        )
                jobs.append(job)
    return jobs


def _sidecar(job: GenerationJob, clip_count: int) -> dict:
    meta = {
        "item_id": job.item_id,
        "condition": job.condition,
        "method": job.method.value if job.method else None,
        "seed": job.seed,
        "target_lufs": job.target_lufs,
        "clip_count": clip_count,
    }
    if job.method is ProcessingMethod.DE:
        meta["params"] = dataclasses.asdict(DeParams())
        meta["dialogue"] = str(job.dialogue_path)
        meta["background"] = str(job.background_path)
    elif job.method is not None:
        params = params_for(job.method, QualityLevel(job.condition), seed=job.seed)
        meta["params"] = dataclasses.asdict(params)
    elif job.condition in ANCHOR_CUTOFFS:
        meta["params"] = {"cutoff_hz": ANCHOR_CUTOFFS[job.condition]}
    else:
        meta["params"] = {}
    return meta


def execute_job(job: GenerationJob) -> JobResult:
    """Generate one condition file plus its sidecar. Worker-pool safe."""
    try:
        if job.method is ProcessingMethod.DE:
            if job.dialogue_path is None or not Path(job.dialogue_path).exists():
                raise GenerationError(
                    f"DE stems missing for {job.item_id} {job.condition} "
                    f"(expected {job.dialogue_path})"
                )
            if job.background_path is None or not Path(job.background_path).exists():
                raise GenerationError(f"DE background stem missing: {job.background_path}")
            buffer = remix_de(
                read_wav(job.dialogue_path), read_wav(job.background_path),
                DeParams(), job.target_lufs,
            )
        else:
            item = read_wav(job.input_path)
            if job.condition == "reference":
                buffer = generate_reference(item, job.target_lufs)
            elif job.condition in ANCHOR_CUTOFFS:
                buffer = generate_anchor(item, job.condition, job.target_lufs)
            else:
                buffer = generate_condition(
                    item, job.method, QualityLevel(job.condition), job.seed, job.target_lufs
                )
        job.output_path.parent.mkdir(parents=True, exist_ok=True)
        clip_count = write_wav(buffer, job.output_path, "float32")
        sidecar = Path(str(job.output_path) + ".json")
        sidecar.write_text(
            json.dumps(_sidecar(job, clip_count), sort_keys=True, indent=2) + "\n",
            encoding="utf-8",
        )
        return JobResult(job, True, clip_count=clip_count)
    except (AqlabError, OSError) as exc:
        return JobResult(job, False, error=f"{type(exc).__name__}: {exc}")


def run_jobs(jobs: list[GenerationJob], workers: int = 1) -> list[JobResult]:
    """Run jobs, in a process pool when workers > 1. Failures do not stop the batch."""
    if workers <= 1:
        return [execute_job(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(execute_job, jobs))
