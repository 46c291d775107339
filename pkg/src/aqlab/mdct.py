"""MDCT/IMDCT with sine window, 50% overlap, orthonormal scaling.

The forward transform folds each windowed block into half length and
applies a DCT-IV; inverse is the transpose. With the sine window the
Princen-Bradley condition holds and overlap-add cancels time-domain
aliasing exactly. Coefficients are scaled so that total coefficient
energy matches windowed-signal energy (Parseval), which makes
``coefficient_power`` directly comparable with the STFT calibration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.fft import dct, idct

from .buffer import AudioBuffer
from .errors import ParameterError
from .kernels import overlap_add
from .stft import sine_window

__all__ = [
    "MdctConfig",
    "BLOCK_LENGTHS",
    "mdct",
    "imdct",
    "mdct_1d",
    "imdct_1d",
    "mdct_frames",
    "windowed_frames",
    "coefficient_power",
    "mdct_frequencies",
]

BLOCK_LENGTHS = (1024, 2048, 4096)


@dataclass(frozen=True)
class MdctConfig:
    block_length: int

    def __post_init__(self):
        if self.block_length not in BLOCK_LENGTHS:
            raise ParameterError(
                f"block_length must be one of {BLOCK_LENGTHS}, got {self.block_length}"
            )

    @property
    def hop(self) -> int:
        return self.block_length // 2

    @property
    def num_coefficients(self) -> int:
        return self.block_length // 2


def windowed_frames(x: np.ndarray, config: MdctConfig) -> np.ndarray:
    """Sine-windowed hop-spaced blocks, zero-padded one block at each end."""
    n, hop = config.block_length, config.hop
    x = np.asarray(x, dtype=np.float64)
    tail = (-(len(x) + n)) % hop
    xp = np.concatenate([np.zeros(n), x, np.zeros(n + tail)])
    n_frames = (len(xp) - n) // hop + 1
    view = np.lib.stride_tricks.sliding_window_view(xp, n)[::hop]
    return view[:n_frames] * sine_window(n)


def _fold(frames: np.ndarray) -> np.ndarray:
    q = frames.shape[1] // 4
    a = frames[:, :q]
    b = frames[:, q:2 * q]
    c = frames[:, 2 * q:3 * q]
    d = frames[:, 3 * q:]
    return np.concatenate([-d - c[:, ::-1], a - b[:, ::-1]], axis=1)


def _unfold(v: np.ndarray) -> np.ndarray:
    q = v.shape[1] // 2
    v1, v2 = v[:, :q], v[:, q:]
    return np.concatenate([v2, -v2[:, ::-1], -v1[:, ::-1], -v1], axis=1)


def mdct_frames(windowed: np.ndarray) -> np.ndarray:
    """MDCT of pre-windowed blocks (n_frames, N) -> (n_frames, N/2)."""
    return dct(_fold(windowed), type=4, norm="ortho", axis=1)


def mdct_1d(x: np.ndarray, config: MdctConfig) -> np.ndarray:
    """MDCT of a 1-D signal -> (frames, block_length/2) coefficients."""
    return mdct_frames(windowed_frames(x, config))


def imdct_1d(coeffs: np.ndarray, config: MdctConfig, num_samples: int) -> np.ndarray:
    """Inverse MDCT with overlap-add, trimmed back to ``num_samples``."""
    n, hop = config.block_length, config.hop
    frames = _unfold(idct(coeffs, type=4, norm="ortho", axis=1)) * sine_window(n)
    out_len = hop * (coeffs.shape[0] - 1) + n
    y = overlap_add(frames, hop, out_len)
    return y[n:n + num_samples]


def mdct(buffer: AudioBuffer, config: MdctConfig) -> np.ndarray:
    """Per-channel MDCT -> (channels, frames, block_length/2)."""
    return np.stack([mdct_1d(buffer.channel(c), config) for c in range(buffer.num_channels)])


def imdct(coeffs: np.ndarray, config: MdctConfig, num_samples: int, sample_rate: int) -> AudioBuffer:
    channels = [imdct_1d(coeffs[c], config, num_samples) for c in range(coeffs.shape[0])]
    return AudioBuffer(np.stack(channels), sample_rate)


def coefficient_power(coeffs: np.ndarray, config: MdctConfig) -> np.ndarray:
    """Per-coefficient mean-square power, same calibration as spectral_power."""
    return coeffs**2 * (2.0 / config.block_length)


def mdct_frequencies(config: MdctConfig, sample_rate: int) -> np.ndarray:
    k = np.arange(config.num_coefficients)
    return (k + 0.5) * sample_rate / config.block_length
