"""Critical-band (Bark) scale utilities and the absolute hearing threshold.

Uses the traditional Zwicker mapping z(f) = 13*atan(0.76 f/kHz)
+ 3.5*atan((f/7.5kHz)^2) and the Terhardt threshold-in-quiet curve.
Digital level is calibrated so that a full-scale sine corresponds to
96 dB SPL; power quantities throughout are mean-square sample power,
so that same sine carries power 0.5.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import brentq

__all__ = [
    "FULL_SCALE_SINE_DB_SPL",
    "bark",
    "bark_to_hz",
    "num_bands",
    "band_index",
    "band_edges_hz",
    "band_center_hz",
    "threshold_in_quiet_spl",
    "threshold_in_quiet_power",
]

FULL_SCALE_SINE_DB_SPL = 96.0


def bark(freq_hz):
    """Bark-scale value for frequency in Hz (vectorized)."""
    f = np.asarray(freq_hz, dtype=np.float64)
    return 13.0 * np.arctan(0.76 * f / 1000.0) + 3.5 * np.arctan((f / 7500.0) ** 2)


def bark_to_hz(z: float, f_max: float = 30000.0) -> float:
    """Inverse Bark mapping via root finding on the monotone forward map."""
    z = float(z)
    if z <= 0.0:
        return 0.0
    top = float(bark(f_max))
    if z >= top:
        return f_max
    return brentq(lambda f: float(bark(f)) - z, 0.0, f_max, xtol=1e-6)


def num_bands(sample_rate: int) -> int:
    """Number of 1-Bark bands up to Nyquist."""
    return int(np.floor(bark(sample_rate / 2.0))) + 1


def band_index(freqs_hz: np.ndarray, sample_rate: int) -> np.ndarray:
    """Map frequencies to 1-Bark band indices, clipped to the valid range."""
    nb = num_bands(sample_rate)
    return np.clip(np.floor(bark(freqs_hz)).astype(int), 0, nb - 1)


def band_edges_hz(sample_rate: int) -> np.ndarray:
    """Hz edges of the 1-Bark bands: length num_bands+1, last edge at Nyquist."""
    nyq = sample_rate / 2.0
    nb = num_bands(sample_rate)
    edges = [0.0]
    for b in range(1, nb):
        edges.append(bark_to_hz(float(b), nyq))
    edges.append(nyq)
    return np.array(edges)


def band_center_hz(band: int, sample_rate: int) -> float:
    """Band center: frequency at the midpoint of the band's Bark span."""
    z_top = float(bark(sample_rate / 2.0))
    z_lo = float(band)
    z_hi = min(z_lo + 1.0, z_top)
    return bark_to_hz((z_lo + z_hi) / 2.0, sample_rate / 2.0)


def threshold_in_quiet_spl(freq_hz):
    """Terhardt threshold in quiet, dB SPL."""
    f = np.maximum(np.asarray(freq_hz, dtype=np.float64), 20.0) / 1000.0
    return 3.64 * f**-0.8 - 6.5 * np.exp(-0.6 * (f - 3.3) ** 2) + 1e-3 * f**4


def threshold_in_quiet_power(freq_hz):
    """Threshold in quiet as mean-square power under the 96 dB SPL calibration."""
    spl = threshold_in_quiet_spl(freq_hz)
    return 0.5 * 10.0 ** ((spl - FULL_SCALE_SINE_DB_SPL) / 10.0)
