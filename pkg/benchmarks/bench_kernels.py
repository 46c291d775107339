"""Benchmark the numba kernels against their numpy fallbacks.

Run: python3 benchmarks/bench_kernels.py
The same comparison drives the AQLAB_DISABLE_NUMBA escape hatch: correctness
is asserted here before timing, so both paths stay interchangeable.
"""

from __future__ import annotations

import time

import numpy as np

from aqlab import kernels


def _time(fn, *args, repeats: int = 5) -> float:
    fn(*args)  # warmup / JIT
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def bench_overlap_add(n_seconds: float = 60.0, sr: int = 48000) -> None:
    hop, frame = 1024, 2048
    n_frames = int(n_seconds * sr) // hop
    frames = np.random.default_rng(0).standard_normal((n_frames, frame))
    out_len = hop * (n_frames - 1) + frame

    t_numpy = _time(kernels.overlap_add_numpy, frames, hop, out_len)
    print(f"overlap_add   numpy: {t_numpy * 1e3:8.2f} ms  ({n_frames} frames)")
    if kernels.overlap_add_numba is not None:
        ref = kernels.overlap_add_numpy(frames, hop, out_len)
        got = kernels.overlap_add_numba(frames, hop, out_len)
        assert np.allclose(ref, got, atol=1e-12)
        t_numba = _time(kernels.overlap_add_numba, frames, hop, out_len)
        print(f"overlap_add   numba: {t_numba * 1e3:8.2f} ms  "
              f"(speedup {t_numpy / t_numba:4.1f}x)")


def bench_oscillator_bank(n_seconds: float = 20.0, sr: int = 48000) -> None:
    rng = np.random.default_rng(1)
    n_samples = int(n_seconds * sr)
    n_bands, n_frames = 20, n_samples // 1024 + 2
    freqs = np.sort(rng.uniform(3000, 20000, n_bands))
    amps = rng.uniform(0, 0.05, (n_bands, n_frames))
    centers = 1024.0 * np.arange(n_frames) - 1024.0
    phases = rng.uniform(0, 2 * np.pi, n_bands)
    args = (freqs, amps, centers, phases, n_samples, float(sr))

    t_numpy = _time(kernels.oscillator_bank_numpy, *args)
    print(f"oscillator    numpy: {t_numpy * 1e3:8.2f} ms  "
          f"({n_bands} bands x {n_samples} samples)")
    if kernels.oscillator_bank_numba is not None:
        ref = kernels.oscillator_bank_numpy(*args)
        got = kernels.oscillator_bank_numba(*args)
        assert np.allclose(ref, got, atol=1e-9)
        t_numba = _time(kernels.oscillator_bank_numba, *args)
        print(f"oscillator    numba: {t_numba * 1e3:8.2f} ms  "
              f"(speedup {t_numpy / t_numba:4.1f}x)")


if __name__ == "__main__":
    print(f"active path: {'numba' if kernels.USING_NUMBA else 'numpy'}")
    bench_overlap_add()
    bench_oscillator_bank()
