"""Hot inner-loop kernels: numba-compiled with a pure-numpy fallback.

The overlap-add accumulator and the per-band oscillator bank dominate
runtime for long inputs. Both exist in two equivalent implementations:

* ``*_numba``: ``@njit``-compiled loops (used by default when numba is
  importable),
* ``*_numpy``: vectorized numpy (always available).

Set ``AQLAB_DISABLE_NUMBA=1`` to force the numpy path; ``USING_NUMBA``
reports which path the public names are bound to. ``benchmarks/bench_kernels.py``
compares the two.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = [
    "USING_NUMBA",
    "overlap_add",
    "overlap_add_numpy",
    "oscillator_bank",
    "oscillator_bank_numpy",
]

_DISABLED = os.environ.get("AQLAB_DISABLE_NUMBA", "").strip() in ("1", "true", "yes")

try:  # pragma: no cover - exercised indirectly via both paths
    if _DISABLED:
        raise ImportError("numba disabled by AQLAB_DISABLE_NUMBA")
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False


def overlap_add_numpy(frames: np.ndarray, hop: int, out_length: int) -> np.ndarray:
    """Sum hop-spaced frames (n_frames, frame_len) into a 1-D signal."""
    n_frames, frame_len = frames.shape
    out = np.zeros(out_length)
    idx = np.arange(frame_len)[None, :] + hop * np.arange(n_frames)[:, None]
    np.add.at(out, idx.reshape(-1), frames.reshape(-1))
    return out


def oscillator_bank_numpy(
    freqs: np.ndarray,
    amps: np.ndarray,
    centers: np.ndarray,
    phases: np.ndarray,
    n_samples: int,
    sample_rate: float,
) -> np.ndarray:
    """Sum of sinusoids with per-frame amplitude envelopes.

    ``amps[b, f]`` is the amplitude of band ``b`` at sample position
    ``centers[f]``; between centers the amplitude is interpolated linearly
    and held at the ends. Each sinusoid keeps a single continuous phase
    ``2*pi*f*t + phase`` across the whole signal.
    """
    t = np.arange(n_samples) / sample_rate
    out = np.zeros(n_samples)
    for b in range(len(freqs)):
        env = np.interp(np.arange(n_samples, dtype=np.float64), centers, amps[b])
        out += env * np.sin(2.0 * np.pi * freqs[b] * t + phases[b])
    return out


if _HAVE_NUMBA:

    @njit(cache=True)
    def _overlap_add_jit(frames, hop, out_length):  # pragma: no cover - compiled
        n_frames, frame_len = frames.shape
        out = np.zeros(out_length)
        for i in range(n_frames):
            base = i * hop
            for n in range(frame_len):
                out[base + n] += frames[i, n]
        return out

    @njit(cache=True)
    def _oscillator_bank_jit(freqs, amps, centers, phases, n_samples, sample_rate):  # pragma: no cover
        out = np.zeros(n_samples)
        n_centers = len(centers)
        for b in range(len(freqs)):
            omega = 2.0 * np.pi * freqs[b] / sample_rate
            seg = 0
            for n in range(n_samples):
                pos = float(n)
                while seg + 2 < n_centers and pos > centers[seg + 1]:
                    seg += 1
                if pos <= centers[0]:
                    env = amps[b, 0]
                elif pos >= centers[n_centers - 1]:
                    env = amps[b, n_centers - 1]
                else:
                    span = centers[seg + 1] - centers[seg]
                    frac = (pos - centers[seg]) / span
                    env = amps[b, seg] + frac * (amps[b, seg + 1] - amps[b, seg])
                out[n] += env * np.sin(omega * n + phases[b])
        return out

    def overlap_add_numba(frames: np.ndarray, hop: int, out_length: int) -> np.ndarray:
        return _overlap_add_jit(np.ascontiguousarray(frames, dtype=np.float64), hop, out_length)

    def oscillator_bank_numba(freqs, amps, centers, phases, n_samples, sample_rate):
        return _oscillator_bank_jit(
            np.ascontiguousarray(freqs, dtype=np.float64),
            np.ascontiguousarray(amps, dtype=np.float64),
            np.ascontiguousarray(centers, dtype=np.float64),
            np.ascontiguousarray(phases, dtype=np.float64),
            n_samples,
            float(sample_rate),
        )

    overlap_add = overlap_add_numba
    oscillator_bank = oscillator_bank_numba
    USING_NUMBA = True
else:
    overlap_add_numba = None
    oscillator_bank_numba = None
    overlap_add = overlap_add_numpy
    oscillator_bank = oscillator_bank_numpy
    USING_NUMBA = False
