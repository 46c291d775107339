"""Multichannel audio container and elementary channel algebra.

All DSP in this package operates on :class:`AudioBuffer`: float64 samples in
nominal range [-1, 1], shaped (channels, samples), with mono and stereo
layouts only. Buffers are immutable; every operation returns a new buffer.
"""

from __future__ import annotations

import numpy as np

from .errors import ParameterError

__all__ = ["AudioBuffer", "ms_encode", "ms_decode", "downmix_mono"]


class AudioBuffer:
    """Immutable audio signal: (channels, samples) float64 plus sample rate.

    Accepts 1-D input for mono. Data is copied, cast to float64, and
    write-protected; all samples must be finite.
    """

    __slots__ = ("_data", "_sample_rate")

    def __init__(self, data: np.ndarray, sample_rate: int):
        arr = np.array(data, dtype=np.float64, copy=True)
        if arr.ndim == 1:
            arr = arr[np.newaxis, :]
        if arr.ndim != 2:
            raise ParameterError(f"audio data must be 1-D or 2-D, got {arr.ndim}-D")
        if arr.shape[0] not in (1, 2):
            raise ParameterError(f"only mono/stereo supported, got {arr.shape[0]} channels")
        if arr.shape[1] == 0:
            raise ParameterError("audio data must contain at least one sample")
        if not np.all(np.isfinite(arr)):
            raise ParameterError("audio data contains non-finite samples")
        if not (isinstance(sample_rate, (int, np.integer)) and sample_rate > 0):
            raise ParameterError(f"sample rate must be a positive integer, got {sample_rate!r}")
        arr.setflags(write=False)
        self._data = arr
        self._sample_rate = int(sample_rate)

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def sample_rate(self) -> int:
        return self._sample_rate

    @property
    def num_channels(self) -> int:
        return self._data.shape[0]

    @property
    def num_samples(self) -> int:
        return self._data.shape[1]

    @property
    def duration(self) -> float:
        return self.num_samples / self._sample_rate

    def channel(self, index: int) -> np.ndarray:
        """Read-only view of one channel."""
        return self._data[index]

    def with_data(self, data: np.ndarray) -> "AudioBuffer":
        """New buffer at the same sample rate."""
        return AudioBuffer(data, self._sample_rate)

    def scaled(self, gain: float) -> "AudioBuffer":
        return self.with_data(self._data * gain)

    def __repr__(self) -> str:
        return (
            f"AudioBuffer(channels={self.num_channels}, samples={self.num_samples}, "
            f"rate={self._sample_rate})"
        )


def ms_encode(stereo: AudioBuffer) -> tuple[AudioBuffer, AudioBuffer]:
    """Mid-side transform: M = (L+R)/2, S = (L-R)/2.

    Processing M and S independently keeps artifacts in the phantom center
    of the stereo image.
    """
    if stereo.num_channels != 2:
        raise ParameterError("ms_encode requires a stereo buffer")
    left, right = stereo.data
    mid = stereo.with_data((left + right) / 2.0)
    side = stereo.with_data((left - right) / 2.0)
    return mid, side


def ms_decode(mid: AudioBuffer, side: AudioBuffer) -> AudioBuffer:
    """Inverse of :func:`ms_encode`: L = M+S, R = M-S (exact identity)."""
    if mid.num_channels != 1 or side.num_channels != 1:
        raise ParameterError("ms_decode expects mono mid and side buffers")
    if mid.num_samples != side.num_samples or mid.sample_rate != side.sample_rate:
        raise ParameterError("mid and side buffers must match in length and rate")
    m, s = mid.channel(0), side.channel(0)
    return AudioBuffer(np.stack([m + s, m - s]), mid.sample_rate)


def downmix_mono(buffer: AudioBuffer) -> AudioBuffer:
    """Passive mono downmix (L+R)/2; mono input passes through."""
    if buffer.num_channels == 1:
        return buffer
    return buffer.with_data(buffer.data.mean(axis=0))
