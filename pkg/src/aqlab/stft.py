"""Short-time Fourier analysis/synthesis with perfect reconstruction.

Default configuration: sine window, 50% overlap, 2048 samples. The sine
window squares to a Hann, whose 50%-overlap sum is constant, so the
analysis/synthesis pair reconstructs exactly; synthesis additionally
normalizes by the accumulated squared window, which keeps reconstruction
exact for any window with nonvanishing overlap coverage.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .buffer import AudioBuffer
from .errors import ParameterError
from .kernels import overlap_add

__all__ = [
    "StftConfig",
    "Spectrogram",
    "sine_window",
    "stft",
    "istft",
    "stft_1d",
    "istft_1d",
    "rfft_frequencies",
    "spectral_power",
]


def sine_window(length: int) -> np.ndarray:
    """sin(pi*(n+1/2)/N): used for both STFT and MDCT framing."""
    return np.sin(np.pi * (np.arange(length) + 0.5) / length)


@dataclass(frozen=True)
class StftConfig:
    window_length: int = 2048
    hop: int = 1024
    window: np.ndarray = field(default=None, repr=False)  # type: ignore[assignment]

    def __post_init__(self):
        if self.window_length < 2:
            raise ParameterError("window_length must be at least 2")
        if not 1 <= self.hop <= self.window_length:
            raise ParameterError(
                f"hop must be in [1, window_length], got hop={self.hop} "
                f"window_length={self.window_length}"
            )
        if self.window is None:
            object.__setattr__(self, "window", sine_window(self.window_length))
        else:
            w = np.asarray(self.window, dtype=np.float64)
            if w.shape != (self.window_length,):
                raise ParameterError("window length does not match window_length")
            object.__setattr__(self, "window", w)

    @property
    def num_bins(self) -> int:
        return self.window_length // 2 + 1


@dataclass(frozen=True)
class Spectrogram:
    """Complex STFT frames per channel: data shaped (channels, frames, bins)."""

    data: np.ndarray
    sample_rate: int
    num_samples: int


def rfft_frequencies(config: StftConfig, sample_rate: int) -> np.ndarray:
    return np.arange(config.num_bins) * sample_rate / config.window_length


def _pad_and_frame(x: np.ndarray, config: StftConfig) -> np.ndarray:
    """Zero-pad one window at each end and cut hop-spaced frames."""
    n, hop = config.window_length, config.hop
    tail = (-(len(x) + n)) % hop
    xp = np.concatenate([np.zeros(n), x, np.zeros(n + tail)])
    n_frames = (len(xp) - n) // hop + 1
    view = np.lib.stride_tricks.sliding_window_view(xp, n)[::hop]
    return view[:n_frames]

def stft_1d(x: np.ndarray, config: StftConfig) -> np.ndarray:
    """STFT of a 1-D signal -> (frames, bins) complex."""
    frames = _pad_and_frame(np.asarray(x, dtype=np.float64), config)
    return np.fft.rfft(frames * config.window, axis=1)


def istft_1d(spec: np.ndarray, config: StftConfig, num_samples: int) -> np.ndarray:
    """Inverse of :func:`stft_1d`, trimmed back to ``num_samples``."""
    n, hop = config.window_length, config.hop
    frames = np.fft.irfft(spec, n=n, axis=1) * config.window
    out_len = hop * (spec.shape[0] - 1) + n
    acc = overlap_add(frames, hop, out_len)
    wsq = overlap_add(
        np.broadcast_to(config.window**2, frames.shape).copy(), hop, out_len
    )
    out = np.where(wsq > 1e-10, acc / np.where(wsq > 1e-10, wsq, 1.0), 0.0)
    return out[n:n + num_samples]


def stft(buffer: AudioBuffer, config: StftConfig = StftConfig()) -> Spectrogram:
    data = np.stack([stft_1d(buffer.channel(c), config) for c in range(buffer.num_channels)])
    return Spectrogram(data, buffer.sample_rate, buffer.num_samples)


def istft(spec: Spectrogram, config: StftConfig = StftConfig()) -> AudioBuffer:
    channels = [istft_1d(spec.data[c], config, spec.num_samples) for c in range(spec.data.shape[0])]
    return AudioBuffer(np.stack(channels), spec.sample_rate)


def spectral_power(spec_frames: np.ndarray, config: StftConfig) -> np.ndarray:
    """Per-bin mean-square power of the underlying signal segment.

    One-sided |X|^2 with interior bins doubled, normalized by the window
    energy, so that summing bins of a frame estimates the frame's
    mean-square power (a full-scale sine contributes 0.5 in its band).
    """
    power = np.abs(spec_frames) ** 2
    scale = np.full(spec_frames.shape[-1], 2.0)
    scale[0] = 1.0
    if config.window_length % 2 == 0:
        scale[-1] = 1.0
    # rfft Parseval: sum_n (w x)^2 = (1/N) sum_k c_k |X_k|^2
    return power * scale / (config.window_length * np.sum(config.window**2))
