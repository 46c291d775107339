"""Native reference-based quality metrics and external score ingestion.

``nmr`` measures error energy against the masked threshold of the
reference using the same Bark model as the pre-echo generator, on the
2048/50% STFT grid. ``si_sdr`` is the scale-invariant SDR. Both operate
on the passive mono downmix, matching how mono-only metrics are treated
in the benchmark. Degenerate cases saturate at +-120 dB sentinels so
downstream correlation code stays total; sentinel rows never enter
correlations because reference conditions are excluded there.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .buffer import AudioBuffer, downmix_mono
from .errors import ManifestError, MetricError, ParameterError, ValidationError
from .manifest import CONDITIONS, StimulusIndex
from .masking import model_for
from .params import ProcessingMethod
from .stft import StftConfig, rfft_frequencies, spectral_power, stft_1d
from .waveio import read_wav

__all__ = [
    "NMR_FLOOR_DB",
    "SI_SDR_CEILING_DB",
    "MetricScore",
    "nmr",
    "si_sdr",
    "ingest_external_scores",
    "measure_batch",
]

NMR_FLOOR_DB = -120.0
SI_SDR_CEILING_DB = 120.0

_METRIC_STFT = StftConfig(window_length=2048, hop=1024)


@dataclass(frozen=True)
class MetricScore:
    metric: str
    item_id: str
    method: ProcessingMethod
    condition: str
    value: float

    def key(self) -> tuple:
        return (self.metric, self.item_id, self.method.value, self.condition)


def _check_pair(reference: AudioBuffer, test: AudioBuffer) -> None:
    if reference.sample_rate != test.sample_rate:
        raise ParameterError("reference and test sample rates differ")
    if reference.num_samples != test.num_samples:
        raise ParameterError("reference and test lengths differ")


def nmr(reference: AudioBuffer, test: AudioBuffer) -> float:
    """Noise-to-mask ratio in dB: error band energy over the masked
    threshold of the reference, averaged linearly over bands and frames."""
    _check_pair(reference, test)
    ref = downmix_mono(reference).channel(0)
    tst = downmix_mono(test).channel(0)
    sr = reference.sample_rate

    model = model_for(rfft_frequencies(_METRIC_STFT, sr), sr)
    spec_ref = stft_1d(ref, _METRIC_STFT)
    spec_err = stft_1d(tst - ref, _METRIC_STFT)

    threshold = model.threshold_from_bands(
        model.band_energies(spectral_power(spec_ref, _METRIC_STFT))
    )
    noise = model.band_energies(spectral_power(spec_err, _METRIC_STFT))
    per_frame = np.mean(noise / threshold, axis=1)
    total = float(np.mean(per_frame))
    if total <= 0.0:
        return NMR_FLOOR_DB
    return max(10.0 * np.log10(total), NMR_FLOOR_DB)


def si_sdr(reference: AudioBuffer, estimate: AudioBuffer) -> float:
    """Scale-invariant SDR in dB; exact matches saturate at +120 dB."""
    _check_pair(reference, estimate)
    ref = downmix_mono(reference).channel(0)
    est = downmix_mono(estimate).channel(0)
    ref_energy = float(np.dot(ref, ref))
    if ref_energy == 0.0:
        raise MetricError("SI-SDR is undefined for an all-zero reference")
    alpha = float(np.dot(est, ref)) / ref_energy
    target = alpha * ref
    residual = est - target
    num = float(np.dot(target, target))
    den = float(np.dot(residual, residual))
    if den == 0.0 or num / den >= 10.0 ** (SI_SDR_CEILING_DB / 10.0):
        return SI_SDR_CEILING_DB
    return 10.0 * np.log10(num / den)


def ingest_external_scores(path: str | Path) -> list[MetricScore]:
    """Load and validate a metric CSV (columns metric,item_id,method,condition,value)."""
    scores: list[MetricScore] = []
    seen: set[tuple] = set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        required = {"metric", "item_id", "method", "condition", "value"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise ValidationError(f"{path}: metric CSV must have columns {sorted(required)}")
        for line, row in enumerate(reader, start=2):
            try:
                method = ProcessingMethod(row["method"])
            except ValueError:
                raise ValidationError(f"{path}:{line}: unknown method {row['method']!r}") from None
            if row["condition"] not in CONDITIONS:
                raise ValidationError(f"{path}:{line}: unknown condition {row['condition']!r}")
            try:
                value = float(row["value"])
            except ValueError:
                raise ValidationError(f"{path}:{line}: non-numeric value {row['value']!r}") from None
            if not np.isfinite(value):
                raise ValidationError(f"{path}:{line}: non-finite value")
            score = MetricScore(row["metric"], row["item_id"], method, row["condition"], value)
            if score.key() in seen:
                raise ValidationError(f"{path}:{line}: duplicate key {score.key()}")
            seen.add(score.key())
            scores.append(score)
    return scores


_NATIVE_METRICS = {"nmr": nmr, "si_sdr": si_sdr}


def measure_batch(stimuli: StimulusIndex | str | Path, metric_name: str) -> list[MetricScore]:
    """Score every condition of every (item, method) pair against its reference."""
    if not isinstance(stimuli, StimulusIndex):
        stimuli = StimulusIndex.from_directory(stimuli)
    if metric_name not in _NATIVE_METRICS:
        raise MetricError(f"unknown native metric {metric_name!r} (have {sorted(_NATIVE_METRICS)})")
    measure = _NATIVE_METRICS[metric_name]

    missing = stimuli.missing_files()
    if missing:
        raise ManifestError("incomplete stimulus set: " + ", ".join(missing[:10]))

    scores = []
    for item_id, method in sorted(stimuli.pairs):
        reference = read_wav(stimuli.condition_path(item_id, method, "reference"))
        for condition in CONDITIONS:
            test = read_wav(stimuli.condition_path(item_id, method, condition))
            value = measure(reference, test)
            scores.append(MetricScore(metric_name, item_id, method, condition, value))
    return scores
