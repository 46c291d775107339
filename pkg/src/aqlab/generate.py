"""The five controlled coding-artifact generators plus the dialogue remix.

All generators take a loudness-normalized buffer and return an equal-length
buffer at the same rate. SH and PE run through mid-side so artifacts sit in
the phantom center; UN, SH, and PE are pure functions of (input, params,
seed). ``generate_condition`` wires normalization, the preset table, and
the per-method processors together.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import bark
from .buffer import AudioBuffer, downmix_mono, ms_decode, ms_encode
from .errors import GenerationError, ParameterError
from .filters import lowpass
from .kernels import oscillator_bank, overlap_add
from .loudness import normalize_loudness
from .masking import model_for
from .mdct import (
    MdctConfig,
    coefficient_power,
    imdct_1d,
    mdct_frames,
    mdct_frequencies,
    windowed_frames,
)
from .params import (
    ArtifactParams,
    DeParams,
    LpParams,
    PeParams,
    ProcessingMethod,
    QualityLevel,
    ShParams,
    TmParams,
    UnParams,
    params_for,
)
from .stft import (
    StftConfig,
    _pad_and_frame,
    istft_1d,
    rfft_frequencies,
    spectral_power,
    stft_1d,
)

__all__ = [
    "DEFAULT_STFT",
    "ANCHOR_CUTOFFS",
    "HoleStats",
    "apply_lp",
    "apply_tm",
    "apply_un",
    "apply_sh",
    "apply_pe",
    "remix_de",
    "generate_condition",
    "generate_reference",
    "generate_anchor",
]

DEFAULT_STFT = StftConfig(window_length=2048, hop=1024)

ANCHOR_CUTOFFS = {"anchor35": 3500.0, "anchor70": 7000.0}

# Frames whose energy is temporally concentrated (onsets) get their masked
# threshold scaled up to the active span instead of the silence-diluted
# frame mean; stationary frames sit above this participation-ratio floor.
_ACTIVITY_FLOOR_FRACTION = 1.0 / 6.0


def _crossover_masks(crossover_hz: float, freqs: np.ndarray, sample_rate: int):
    """Power-complementary split at the crossover.

    The low mask is 1 up to the crossover and falls as a raised cosine
    over the following Bark band; low^2 + high^2 = 1 keeps the summed
    band energy of split-and-recombine signals unchanged.
    """
    nyquist = sample_rate / 2.0
    if not 0.0 < crossover_hz < nyquist:
        raise ParameterError(f"crossover must lie in (0, {nyquist}) Hz, got {crossover_hz}")
    z = bark.bark(freqs)
    z_c = float(bark.bark(crossover_hz))
    t = np.clip(z - z_c, 0.0, 1.0)
    high = np.sin(t * np.pi / 2.0)
    low = np.cos(t * np.pi / 2.0)
    return low, high


def apply_lp(buffer: AudioBuffer, params: LpParams) -> AudioBuffer:
    """Bandwidth limitation: the same filter generates the MUSHRA anchors."""
    return lowpass(buffer, params.cutoff_hz)


def _band_sine_frequency(band: int, z_c: float, sample_rate: int) -> float:
    """Tone placement: center of the band's share above the crossover."""
    z_top = float(bark.bark(sample_rate / 2.0))
    z_lo = max(float(band), z_c)
    z_hi = min(float(band) + 1.0, z_top)
    return bark.bark_to_hz((z_lo + z_hi) / 2.0, sample_rate / 2.0)


def apply_tm(buffer: AudioBuffer, params: TmParams, config: StftConfig = DEFAULT_STFT) -> AudioBuffer:
    """Tonality mismatch: above the crossover, each Bark band becomes one
    phase-continuous sinusoid at the band center carrying the band's
    per-frame energy."""
    sr = buffer.sample_rate
    freqs = rfft_frequencies(config, sr)
    low_amp, high_amp = _crossover_masks(params.crossover_hz, freqs, sr)
    model = model_for(freqs, sr)
    z_c = float(bark.bark(params.crossover_hz))

    bands = [b for b in range(model.num_bands) if np.any(high_amp[model.bin_band == b] > 0)]
    tone_freqs = np.array([_band_sine_frequency(b, z_c, sr) for b in bands])
    phases = (np.arange(len(bands)) * 2.399963229728653) % (2.0 * np.pi)  # golden angle

    out = np.empty_like(buffer.data)
    hop, n_win = config.hop, config.window_length
    for c in range(buffer.num_channels):
        spec = stft_1d(buffer.channel(c), config)
        power = spectral_power(spec, config)
        high_energy = model.band_energies(power * high_amp**2)  # (frames, bands)
        low_part = istft_1d(spec * low_amp, config, buffer.num_samples)

        amps = np.sqrt(2.0 * high_energy[:, bands]).T  # sine amplitude from band power
        centers = hop * np.arange(spec.shape[0], dtype=np.float64) - n_win + (n_win - 1) / 2.0
        tones = oscillator_bank(tone_freqs, amps, centers, phases, buffer.num_samples, float(sr))
        out[c] = low_part + tones
    return buffer.with_data(out)


def _band_noise_carrier(
    rng: np.random.Generator, n_samples: int, sel: np.ndarray, n_bins: int, config: StftConfig
) -> np.ndarray:
    """Locally unit-power Gaussian noise confined to the selected rfft bins.

    Band-limited noise fluctuates in power at the analysis-frame scale
    (few degrees of freedom per frame in narrow bands), so the carrier is
    normalized by its own framewise power, interpolated through the
    squared-window partition of unity; a few iterations push the
    residual framewise deviation well under the 1 dB envelope budget.
    """
    spec = np.zeros(n_bins, dtype=complex)
    spec[sel] = rng.standard_normal(len(sel)) + 1j * rng.standard_normal(len(sel))
    carrier = np.fft.irfft(spec, n=n_samples)
    mean_sq = np.mean(carrier**2)
    if mean_sq == 0.0:
        return carrier
    carrier /= np.sqrt(mean_sq)

    window = config.window
    wsq = window**2
    window_energy = float(np.sum(wsq))
    n_win, hop = config.window_length, config.hop
    for _ in range(3):
        frames = _pad_and_frame(carrier, config)
        frame_power = np.sum((frames * window) ** 2, axis=1) / window_energy
        out_len = hop * (len(frame_power) - 1) + n_win
        num = overlap_add(np.outer(frame_power, wsq), hop, out_len)
        den = overlap_add(np.broadcast_to(wsq, (len(frame_power), n_win)).copy(), hop, out_len)
        envelope = (num / np.maximum(den, 1e-12))[n_win:n_win + n_samples]
        carrier = carrier / np.sqrt(np.maximum(envelope, 1e-8))
    return carrier


def apply_un(buffer: AudioBuffer, params: UnParams, config: StftConfig = DEFAULT_STFT) -> AudioBuffer:
    """Unmasked noise: above the crossover, each Bark band's content is
    replaced by band-limited Gaussian noise amplitude-modulated to the
    band's per-frame energy; seeded per channel."""
    sr = buffer.sample_rate
    n = buffer.num_samples
    freqs = rfft_frequencies(config, sr)
    low_amp, high_amp = _crossover_masks(params.crossover_hz, freqs, sr)
    model = model_for(freqs, sr)
    z_c = float(bark.bark(params.crossover_hz))

    bands = [b for b in range(model.num_bands) if np.any(high_amp[model.bin_band == b] > 0)]
    full_freqs = np.fft.rfftfreq(n, 1.0 / sr)
    full_band = bark.band_index(full_freqs, sr)
    above = bark.bark(full_freqs) > z_c

    streams = np.random.SeedSequence(params.seed).spawn(buffer.num_channels)
    hop, n_win = config.hop, config.window_length

    out = np.empty_like(buffer.data)
    for c in range(buffer.num_channels):
        rng = np.random.default_rng(streams[c])
        spec = stft_1d(buffer.channel(c), config)
        power = spectral_power(spec, config)
        high_energy = model.band_energies(power * high_amp**2)  # (frames, bands)
        centers = hop * np.arange(spec.shape[0], dtype=np.float64) - n_win + (n_win - 1) / 2.0

        noise = np.zeros(n)
        positions = np.arange(n, dtype=np.float64)
        for b in bands:
            sel = np.flatnonzero((full_band == b) & above)
            if len(sel) == 0 or not np.any(high_energy[:, b] > 0):
                continue
            carrier = _band_noise_carrier(rng, n, sel, len(full_freqs), config)
            envelope = np.interp(positions, centers, np.sqrt(high_energy[:, b]))
            noise += envelope * carrier
        out[c] = istft_1d(spec * low_amp, config, n) + noise
    return buffer.with_data(out)


@dataclass(frozen=True)
class HoleStats:
    zeroed_tiles: int
    total_tiles: int

    @property
    def fraction(self) -> float:
        return self.zeroed_tiles / self.total_tiles


def apply_sh(
    buffer: AudioBuffer,
    params: ShParams,
    config: StftConfig = DEFAULT_STFT,
    collect_stats: bool = False,
):
    """Spectral holes: each (frame, Bark band) tile is zeroed independently
    with probability hole_prob, on mid/side streams for stereo input."""
    sr = buffer.sample_rate
    model = model_for(rfft_frequencies(config, sr), sr)

    if buffer.num_channels == 2:
        mid, side = ms_encode(buffer)
        streams = [mid.channel(0), side.channel(0)]
    else:
        streams = [buffer.channel(0)]
    children = np.random.SeedSequence(params.seed).spawn(len(streams))

    zeroed = 0
    total = 0
    processed = []
    for x, child in zip(streams, children):
        rng = np.random.default_rng(child)
        spec = stft_1d(x, config)
        tiles = rng.random((spec.shape[0], model.num_bands)) < params.hole_prob
        zeroed += int(tiles.sum())
        total += tiles.size
        spec[tiles[:, model.bin_band]] = 0.0
        processed.append(istft_1d(spec, config, buffer.num_samples))

    if buffer.num_channels == 2:
        result = ms_decode(
            AudioBuffer(processed[0], sr), AudioBuffer(processed[1], sr)
        )
    else:
        result = buffer.with_data(processed[0])
    if collect_stats:
        return result, HoleStats(zeroed, total)
    return result


def _temporal_activity(windowed: np.ndarray, block_length: int) -> np.ndarray:
    """Participation-ratio activity in (0, 1]: 1 for stationary frames,
    ~samples/N for a frame whose energy sits in a single click."""
    sq = np.sum(windowed**2, axis=1)
    quad = np.sum(windowed**4, axis=1)
    d_eff = np.divide(sq**2, quad, out=np.ones_like(sq), where=quad > 0)
    return np.clip(d_eff / (block_length * _ACTIVITY_FLOOR_FRACTION), None, 1.0)


def apply_pe(buffer: AudioBuffer, params: PeParams) -> AudioBuffer:
    """Pre-echoes: per MDCT block, add seeded Gaussian noise per Bark band
    at the masked threshold plus the target noise-to-mask ratio; block
    length controls the temporal extent of the smearing."""
    sr = buffer.sample_rate
    config = MdctConfig(params.block_length)
    model = model_for(mdct_frequencies(config, sr), sr)
    nmr_linear = 10.0 ** (params.nmr_db / 10.0)

    if buffer.num_channels == 2:
        mid, side = ms_encode(buffer)
        streams = [mid.channel(0), side.channel(0)]
    else:
        streams = [buffer.channel(0)]
    children = np.random.SeedSequence(params.seed).spawn(len(streams))

    processed = []
    for x, child in zip(streams, children):
        rng = np.random.default_rng(child)
        windowed = windowed_frames(x, config)
        coeffs = mdct_frames(windowed)
        band_energy = model.band_energies(coefficient_power(coeffs, config))
        threshold = model.threshold_from_bands(band_energy)
        threshold /= _temporal_activity(windowed, config.block_length)[:, None]

        # coefficient-domain energy target per (frame, band)
        target = threshold * nmr_linear * (config.block_length / 2.0)
        draws = rng.standard_normal(coeffs.shape)
        draw_energy = model.band_energies(draws**2)
        scale = np.sqrt(np.divide(target, draw_energy, out=np.zeros_like(target), where=draw_energy > 0))
        # digital-silence blocks stay silent: a codec emits zeros there
        scale[np.sum(windowed**2, axis=1) == 0.0] = 0.0
        noise = draws * scale[:, model.bin_band]
        processed.append(imdct_1d(coeffs + noise, config, buffer.num_samples))

    if buffer.num_channels == 2:
        return ms_decode(AudioBuffer(processed[0], sr), AudioBuffer(processed[1], sr))
    return buffer.with_data(processed[0])


def remix_de(
    dialogue: AudioBuffer,
    background: AudioBuffer,
    params: DeParams = DeParams(),
    target_lufs: float = -23.0,
) -> AudioBuffer:
    """Dialogue-enhancement remix: dialogue plus background attenuated by
    ``attenuation_db``, normalized to the loudness target."""
    if dialogue.sample_rate != background.sample_rate:
        raise ParameterError("dialogue and background sample rates differ")
    if dialogue.num_samples != background.num_samples:
        raise ParameterError("dialogue and background lengths differ")
    if dialogue.num_channels != background.num_channels:
        raise ParameterError("dialogue and background channel counts differ")
    gain = 10.0 ** (-params.attenuation_db / 20.0)
    mixed = dialogue.with_data(dialogue.data + gain * background.data)
    return normalize_loudness(mixed, target_lufs)


def _apply(buffer: AudioBuffer, params: ArtifactParams) -> AudioBuffer:
    if isinstance(params, LpParams):
        return apply_lp(buffer, params)
    if isinstance(params, TmParams):
        return apply_tm(buffer, params)
    if isinstance(params, UnParams):
        return apply_un(buffer, params)
    if isinstance(params, ShParams):
        return apply_sh(buffer, params)
    if isinstance(params, PeParams):
        return apply_pe(buffer, params)
    raise GenerationError(f"no native generator for {type(params).__name__}")


def generate_condition(
    item: AudioBuffer,
    method: ProcessingMethod,
    level: QualityLevel,
    seed: int,
    target_lufs: float = -23.0,
) -> AudioBuffer:
    """Full pipeline for one condition: normalize, degrade, re-normalize.

    The trailing normalization keeps every stimulus at the listening
    level even for methods that add or remove substantial energy (PE
    injects supra-threshold noise, SH deletes tiles). Deterministic for
    fixed (item, method, level, seed).
    """
    method = ProcessingMethod(method)
    if method is ProcessingMethod.DE:
        raise GenerationError("DE conditions are remixed from supplied stems, not generated")
    normalized = normalize_loudness(item, target_lufs)
    params = params_for(method, QualityLevel(level), seed=seed)
    degraded = _apply(normalized, params)
    return normalize_loudness(degraded, target_lufs)


def generate_reference(item: AudioBuffer, target_lufs: float = -23.0) -> AudioBuffer:
    """Hidden reference: the loudness-normalized item, nothing else."""
    return normalize_loudness(item, target_lufs)


def generate_anchor(item: AudioBuffer, condition: str, target_lufs: float = -23.0) -> AudioBuffer:
    """MUSHRA anchor: 3.5 kHz or 7 kHz low-pass of the normalized item."""
    if condition not in ANCHOR_CUTOFFS:
        raise ParameterError(f"unknown anchor condition {condition!r}")
    normalized = normalize_loudness(item, target_lufs)
    filtered = lowpass(normalized, ANCHOR_CUTOFFS[condition])
    return normalize_loudness(filtered, target_lufs)
