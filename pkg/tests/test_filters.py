import numpy as np
import pytest
from scipy import signal

from aqlab import AudioBuffer, ParameterError, lowpass
from aqlab.filters import design_lowpass


def test_noise_stopband_suppression(rng):
    sr = 48000
    x = rng.standard_normal(6 * sr) * 0.3
    out = lowpass(AudioBuffer(x, sr), 5000.0)
    f, pxx_in = signal.welch(x, sr, nperseg=4096)
    _, pxx_out = signal.welch(out.channel(0), sr, nperseg=4096)
    passband = (f > 500) & (f < 4500)
    stopband = f > 6250
    atten = 10 * np.log10(np.median(pxx_out[stopband]) / np.median(pxx_in[passband]))
    assert atten < -60.0


def test_sine_passband_flat_and_aligned(rng):
    sr = 48000
    t = np.arange(2 * sr) / sr
    x = 0.5 * np.sin(2 * np.pi * 1000.0 * t)
    out = lowpass(AudioBuffer(x, sr), 5000.0).channel(0)
    assert out.shape == x.shape
    core = slice(sr // 4, -sr // 4)
    gain_db = 10 * np.log10(np.mean(out[core] ** 2) / np.mean(x[core] ** 2))
    assert abs(gain_db) < 0.1
    lags = signal.correlation_lags(len(x[core]), len(out[core]))
    corr = signal.correlate(x[core], out[core])
    assert lags[np.argmax(corr)] == 0


def test_cutoff_bounds():
    buf = AudioBuffer(np.zeros(1000), 48000)
    with pytest.raises(ParameterError):
        lowpass(buf, 24000.0)
    with pytest.raises(ParameterError):
        lowpass(buf, 0.0)
    with pytest.raises(ParameterError):
        design_lowpass(-5.0, 48000)


def test_linearity(rng):
    sr = 48000
    a = rng.standard_normal(sr) * 0.2
    b = rng.standard_normal(sr) * 0.2
    fa = lowpass(AudioBuffer(a, sr), 8000.0).channel(0)
    fb = lowpass(AudioBuffer(b, sr), 8000.0).channel(0)
    fab = lowpass(AudioBuffer(a + b, sr), 8000.0).channel(0)
    assert np.max(np.abs(fab - (fa + fb))) < 1e-9


def test_passband_ripple_spec():
    sr = 48000
    for cutoff in (3500.0, 5000.0, 15000.0):
        taps = design_lowpass(cutoff, sr)
        w, h = signal.freqz(taps, worN=8192, fs=sr)
        pb = w < 0.95 * cutoff
        ripple_db = 20 * np.log10(np.abs(h[pb]))
        assert np.max(np.abs(ripple_db)) < 0.1
        sb = w > 1.25 * cutoff
        if np.any(sb):
            assert np.max(20 * np.log10(np.abs(h[sb]) + 1e-12)) < -60.0
