"""Command-line front door: generate | measure | bench | report | serve | export.

Every command is deterministic given its inputs and ``--seed``; generation
refuses to run without an explicit seed. Flags can be defaulted through
environment variables prefixed ``AQLAB_`` (for example ``AQLAB_SEED``,
``AQLAB_JOBS``). Exit codes: 0 success, 2 validation error, 3 I/O error,
4 partial batch failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

from .bench import benchmark, heatmap_svg, report_csv
from .errors import (
    AqlabError,
    AudioFormatError,
    ManifestError,
    MetricError,
    ParameterError,
    StatsError,
    ValidationError,
)
from .manifest import StimulusIndex, read_batch_manifest
from .metrics import ingest_external_scores, measure_batch
from .params import ProcessingMethod, QualityLevel
from .scores import Cohort, load_column_mapping, load_scores, post_screen
from .stats import cohort_compare, mean_ci

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_IO = 3
EXIT_PARTIAL = 4

ENV_PREFIX = "AQLAB_"


def _env(name: str):
    return os.environ.get(ENV_PREFIX + name.upper())


def _log(message: str) -> None:
    print(message, file=sys.stderr)


# ----------------------------------------------------------------- generate

def cmd_generate(args) -> int:
    from .batch import plan_jobs, run_jobs

    if args.seed is None:
        _log("error: --seed is required for generate (no silent nondeterminism)")
        return EXIT_VALIDATION
    entries = read_batch_manifest(args.manifest)
    methods = [ProcessingMethod(m) for m in args.method] if args.method else None
    levels = [QualityLevel(l) for l in args.level] if args.level else None
    jobs = plan_jobs(
        entries,
        Path(args.out),
        args.seed,
        methods=methods,
        levels=levels,
        stems_dir=Path(args.stems) if args.stems else None,
        target_lufs=args.loudness_target,
    )
    if args.dry_run:
        for job in jobs:
            print(f"would write {job.output_path} (seed {job.seed})")
        print(f"dry run: {len(jobs)} files planned")
        return EXIT_OK

    results = run_jobs(jobs, workers=args.jobs)
    failures = [r for r in results if not r.ok]
    clipped = sum(r.clip_count for r in results)
    _log(f"generated {len(results) - len(failures)}/{len(results)} files"
         + (f", {clipped} clipped samples" if clipped else ""))
    for failure in failures:
        _log(f"failed: {failure.job.output_path.name}: {failure.error}")
    return EXIT_PARTIAL if failures else EXIT_OK


# ----------------------------------------------------------------- measure

def cmd_measure(args) -> int:
    index = StimulusIndex.from_directory(args.stimuli)
    if args.dry_run:
        pairs = sorted(index.pairs)
        for item, method in pairs:
            print(f"would measure {args.metric} for {item}/{method.value} (8 conditions)")
        print(f"dry run: {8 * len(pairs)} measurements planned")
        return EXIT_OK
    scores = measure_batch(index, args.metric)
    out = Path(args.out)
    with open(out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric", "item_id", "method", "condition", "value"])
        for s in scores:
            writer.writerow([s.metric, s.item_id, s.method.value, s.condition, f"{s.value:.6f}"])
    _log(f"wrote {len(scores)} scores to {out}")
    return EXIT_OK


# ----------------------------------------------------------------- helpers

def _load_screened(args):
    mapping = load_column_mapping(args.mapping) if args.mapping else None
    result = load_scores(list(args.scores), column_mapping=mapping)
    for warning in result.warnings:
        _log(f"completeness: {warning}")
    screen = post_screen(result.records)
    for listener in screen.excluded:
        _log(f"post-screen: excluded {listener} "
             f"(reference failure rate {screen.failure_rates[listener]:.0%})")
    return screen


# ----------------------------------------------------------------- bench

def cmd_bench(args) -> int:
    screen = _load_screened(args)
    if args.dry_run:
        for metric_file in args.metrics:
            print(f"would benchmark {metric_file} against {len(screen.kept)} grades")
        return EXIT_OK

    reports = []
    for metric_file in args.metrics:
        scores = ingest_external_scores(metric_file)
        by_name: dict[str, list] = {}
        for s in scores:
            by_name.setdefault(s.metric, []).append(s)
        for name in sorted(by_name):
            report = benchmark(by_name[name], screen.kept)
            for warning in report.warnings:
                _log(f"{name}: {warning}")
            reports.append(report)
            if args.per_cohort:
                for cohort in Cohort:
                    subset = [r for r in screen.kept if r.cohort is cohort]
                    if not subset:
                        continue
                    sub = benchmark(by_name[name], subset)
                    sub.metric = f"{name}@{cohort.value}"
                    reports.append(sub)

    Path(args.out).write_text(report_csv(reports), encoding="utf-8")
    _log(f"wrote correlation report to {args.out}")
    if args.heatmap:
        Path(args.heatmap).write_text(heatmap_svg(reports), encoding="utf-8")
        _log(f"wrote heatmap to {args.heatmap}")
    return EXIT_OK


# ----------------------------------------------------------------- report

def _write_stats_csv(path: Path, stats, key_names) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(key_names) + ["n", "mean", "ci95_low", "ci95_high"])
        for s in stats:
            writer.writerow(list(s.key) + [s.n, f"{s.mean:.4f}", f"{s.ci95_low:.4f}",
                                           f"{s.ci95_high:.4f}"])


def cmd_report(args) -> int:
    screen = _load_screened(args)
    out_dir = Path(args.out)
    if args.dry_run:
        for name in ("condition_stats.csv", "item_stats.csv",
                     "cohort_stats.csv", "anchor_context.csv", "screening.csv"):
            print(f"would write {out_dir / name}")
        return EXIT_OK
    out_dir.mkdir(parents=True, exist_ok=True)

    _write_stats_csv(out_dir / "condition_stats.csv",
                     mean_ci(screen.kept, ("method", "condition")),
                     ("method", "condition"))
    _write_stats_csv(out_dir / "item_stats.csv",
                     mean_ci(screen.kept, ("method", "condition", "item_id")),
                     ("method", "condition", "item_id"))
    comparison = cohort_compare(screen.kept)
    _write_stats_csv(out_dir / "cohort_stats.csv", comparison["by_cohort"],
                     ("cohort", "method", "condition"))
    _write_stats_csv(out_dir / "anchor_context.csv", comparison["anchor_context"],
                     ("cohort", "condition", "context"))
    with open(out_dir / "screening.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["listener_id", "reference_failure_rate", "excluded"])
        for listener in sorted(screen.failure_rates):
            writer.writerow([listener, f"{screen.failure_rates[listener]:.4f}",
                             str(listener in screen.excluded).lower()])
    _log(f"wrote descriptive statistics to {out_dir}")
    return EXIT_OK


# ----------------------------------------------------------------- serve

def _read_listeners(path: str) -> dict[str, str]:
    listeners = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"listener_id", "cohort"}.issubset(reader.fieldnames):
            raise ValidationError(f"{path}: listeners file needs listener_id,cohort columns")
        for row in reader:
            listeners[row["listener_id"].strip()] = row["cohort"].strip()
    if not listeners:
        raise ValidationError(f"{path}: no listeners defined")
    return listeners


def _service_from_args(args):
    from .service import ListeningTestService, ServiceConfig

    config = ServiceConfig(
        stimulus_dir=Path(args.stimuli),
        results_path=Path(args.results),
        master_seed=args.seed,
        listeners=_read_listeners(args.listeners),
        training_items=args.training.split(",") if args.training else [],
        frontend_dir=Path(args.frontend) if args.frontend else None,
    )
    return ListeningTestService(config)


def cmd_serve(args) -> int:
    if args.seed is None:
        _log("error: --seed is required for serve (plans must be reproducible)")
        return EXIT_VALIDATION
    service = _service_from_args(args)
    if args.dry_run:
        print(f"would serve {len(service.index.pairs)} trial pairs on port {args.port}")
        return EXIT_OK
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(service), host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def cmd_export(args) -> int:
    args.frontend = None
    service = _service_from_args(args)
    if args.dry_run:
        submitted = len(service._submissions)
        print(f"would export {submitted} submissions to {args.out}")
        return EXIT_OK
    csv_text = service.export_scores()
    if service.quarantined:
        _log(f"quarantined {len(service.quarantined)} corrupt store lines")
    Path(args.out).write_text(csv_text, encoding="utf-8")
    _log(f"exported {max(0, len(csv_text.splitlines()) - 1)} grades to {args.out}")
    return EXIT_OK


# ----------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aqlab",
        description="Controlled audio degradations, MUSHRA service, metric benchmark",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def seed_arg(p):
        env = _env("seed")
        p.add_argument("--seed", type=int, default=int(env) if env else None,
                       help="master seed (env AQLAB_SEED)")

    g = sub.add_parser("generate", help="generate degraded stimuli from a manifest")
    g.add_argument("--manifest", required=True, help="CSV: item_id,path,methods")
    g.add_argument("--out", required=True, help="output directory")
    seed_arg(g)
    g.add_argument("--stems", default=_env("stems"), help="directory with DE stems")
    g.add_argument("--method", action="append", choices=[m.value for m in ProcessingMethod],
                   help="restrict to these methods (repeatable)")
    g.add_argument("--level", action="append", choices=[l.value for l in QualityLevel],
                   help="restrict to these levels (repeatable)")
    g.add_argument("--jobs", type=int, default=int(_env("jobs") or 0) or (os.cpu_count() or 1),
                   help="worker processes (env AQLAB_JOBS)")
    g.add_argument("--loudness-target", type=float, default=-23.0)
    g.add_argument("--dry-run", action="store_true")
    g.set_defaults(func=cmd_generate)

    m = sub.add_parser("measure", help="run a native metric over a stimulus directory")
    m.add_argument("--stimuli", required=True)
    m.add_argument("--metric", required=True, choices=["nmr", "si_sdr"])
    m.add_argument("--out", required=True)
    m.add_argument("--dry-run", action="store_true")
    m.set_defaults(func=cmd_measure)

    b = sub.add_parser("bench", help="correlate metric scores against subjective scores")
    b.add_argument("--scores", action="append", required=True, help="subjective CSV (repeatable)")
    b.add_argument("--metrics", action="append", required=True, help="metric CSV (repeatable)")
    b.add_argument("--mapping", help="column-mapping JSON for the score files")
    b.add_argument("--out", required=True, help="report CSV path")
    b.add_argument("--heatmap", help="optional SVG heatmap path")
    b.add_argument("--per-cohort", action="store_true")
    b.add_argument("--dry-run", action="store_true")
    b.set_defaults(func=cmd_bench)

    r = sub.add_parser("report", help="descriptive statistics from subjective scores")
    r.add_argument("--scores", action="append", required=True)
    r.add_argument("--mapping")
    r.add_argument("--out", required=True, help="output directory")
    r.add_argument("--dry-run", action="store_true")
    r.set_defaults(func=cmd_report)

    s = sub.add_parser("serve", help="run the listening-test service")
    s.add_argument("--stimuli", required=True)
    s.add_argument("--results", required=True, help="append-only JSONL store")
    seed_arg(s)
    s.add_argument("--listeners", required=True, help="CSV: listener_id,cohort")
    s.add_argument("--training", default=_env("training"),
                   help="comma-separated training item ids")
    s.add_argument("--port", type=int, default=int(_env("port") or 8585))
    s.add_argument("--host", default="127.0.0.1")
    s.add_argument("--frontend", default=_env("frontend"), help="static UI bundle directory")
    s.add_argument("--dry-run", action="store_true")
    s.set_defaults(func=cmd_serve)

    e = sub.add_parser("export", help="unblind the submission store into the score CSV")
    e.add_argument("--stimuli", required=True)
    e.add_argument("--results", required=True)
    seed_arg(e)
    e.add_argument("--listeners", required=True)
    e.add_argument("--training", default=_env("training"))
    e.add_argument("--out", required=True)
    e.add_argument("--dry-run", action="store_true")
    e.set_defaults(func=cmd_export)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, ParameterError, StatsError, MetricError) as exc:
        _log(f"validation error: {exc}")
        return EXIT_VALIDATION
    except (ManifestError, AudioFormatError, OSError) as exc:
        _log(f"i/o error: {exc}")
        return EXIT_IO
    except AqlabError as exc:
        _log(f"error: {exc}")
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
