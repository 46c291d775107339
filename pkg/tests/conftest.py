import numpy as np
import pytest

from aqlab import AudioBuffer


def pytest_runtest_logreport(report):
    """One visible PASS/FAIL line per acceptance criterion."""
    if "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1].replace("test_acceptance_", "")
    if report.when == "call":
        print(f"\nACCEPTANCE {name}: {'PASS' if report.passed else 'FAIL'}")
    elif report.when == "setup" and report.skipped:
        print(f"\nACCEPTANCE {name}: SKIP ({report.longrepr[2]})")


def pink_noise(rng: np.random.Generator, n: int, channels: int = 1) -> np.ndarray:
    """1/f-power noise via rfft shaping, peak-normalized to 0.5."""
    out = np.empty((channels, n))
    freqs = np.fft.rfftfreq(n)
    shape = np.zeros_like(freqs)
    shape[1:] = 1.0 / np.sqrt(freqs[1:])
    for c in range(channels):
        spec = (rng.standard_normal(len(freqs)) + 1j * rng.standard_normal(len(freqs))) * shape
        spec[0] = 0.0
        x = np.fft.irfft(spec, n=n)
        out[c] = 0.5 * x / np.max(np.abs(x))
    return out


def quantize_float32(x: np.ndarray) -> np.ndarray:
    """Round-trip through float32, the file precision of the pipeline."""
    return x.astype(np.float32).astype(np.float64)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(0xA17)


@pytest.fixture
def pink_stereo(rng) -> AudioBuffer:
    """Four seconds of stereo pink noise at 48 kHz, float32 precision."""
    return AudioBuffer(quantize_float32(pink_noise(rng, 4 * 48000, channels=2)), 48000)


@pytest.fixture
def pink_mono(rng) -> AudioBuffer:
    return AudioBuffer(quantize_float32(pink_noise(rng, 4 * 48000, channels=1)), 48000)
