"""Psychoacoustic masked-threshold model on the 1-Bark band grid.

Per frame: band energies -> two-sided level spreading (27 dB/Bark toward
lower bands, 10 dB/Bark toward higher bands, power-additive) -> fixed
-9 dB offset -> floor at the threshold in quiet. Shared between the
pre-echo generator and the noise-to-mask metric so the two stay
calibration-consistent.
"""

from __future__ import annotations

import numpy as np

from . import bark

__all__ = ["MaskingModel", "masking_threshold"]

_LOWER_SLOPE_DB_PER_BARK = 27.0
_UPPER_SLOPE_DB_PER_BARK = 10.0
_OFFSET_DB = 9.0


class MaskingModel:
    """Masked-threshold computation for a fixed spectral bin grid.

    Parameters
    ----------
    freqs:
        Center frequency in Hz of each spectral bin (rfft bins or MDCT
        coefficient frequencies).
    sample_rate:
        Audio sample rate; fixes the number of 1-Bark bands.
    """

    def __init__(self, freqs: np.ndarray, sample_rate: int):
        self.sample_rate = int(sample_rate)
        self.freqs = np.asarray(freqs, dtype=np.float64)
        self.num_bands = bark.num_bands(sample_rate)
        self.bin_band = bark.band_index(self.freqs, sample_rate)

        # 0/1 membership matrix (bins x bands) for band-energy summation
        self._membership = np.zeros((len(self.freqs), self.num_bands))
        self._membership[np.arange(len(self.freqs)), self.bin_band] = 1.0
        self.band_bin_count = self._membership.sum(axis=0).astype(int)

        delta = np.arange(self.num_bands)[:, None] - np.arange(self.num_bands)[None, :]
        # spreading[j, b]: power gain from excitation in band b into band j
        self.spreading = np.where(
            delta <= 0,
            10.0 ** (_LOWER_SLOPE_DB_PER_BARK * delta / 10.0),
            10.0 ** (-_UPPER_SLOPE_DB_PER_BARK * delta / 10.0),
        )
        self.offset = 10.0 ** (-_OFFSET_DB / 10.0)

        edges = bark.band_edges_hz(sample_rate)
        self.floor = np.empty(self.num_bands)
        for b in range(self.num_bands):
            grid = np.linspace(max(edges[b], 1.0), max(edges[b + 1], 2.0), 64)
            self.floor[b] = float(np.min(bark.threshold_in_quiet_power(grid)))

    def band_energies(self, bin_power: np.ndarray) -> np.ndarray:
        """Sum calibrated per-bin power into Bark bands: (..., bins) -> (..., bands)."""
        return np.asarray(bin_power, dtype=np.float64) @ self._membership

    def threshold_from_bands(self, band_energy: np.ndarray) -> np.ndarray:
        """Spread, offset, and floor band energies into masked thresholds."""
        spread = band_energy @ self.spreading.T
        return np.maximum(spread * self.offset, self.floor)

    def threshold(self, bin_power: np.ndarray) -> np.ndarray:
        return self.threshold_from_bands(self.band_energies(bin_power))


_MODEL_CACHE: dict[tuple, MaskingModel] = {}


def model_for(freqs: np.ndarray, sample_rate: int) -> MaskingModel:
    """Memoized MaskingModel lookup keyed on the bin grid."""
    key = (int(sample_rate), len(freqs), float(freqs[0]), float(freqs[-1]))
    model = _MODEL_CACHE.get(key)
    if model is None:
        model = _MODEL_CACHE[key] = MaskingModel(freqs, sample_rate)
    return model


def masking_threshold(
    frame_power: np.ndarray, sample_rate: int, freqs: np.ndarray | None = None
) -> np.ndarray:
    """Masked threshold per Bark band for one frame of per-bin power.

    If ``freqs`` is omitted, an odd bin count is interpreted as an rfft
    grid (k * sr / N) and an even one as an MDCT grid ((k+1/2) * sr / N).
    """
    frame_power = np.asarray(frame_power, dtype=np.float64)
    n = frame_power.shape[-1]
    if freqs is None:
        if n % 2:
            freqs = np.arange(n) * sample_rate / (2 * (n - 1))
        else:
            freqs = (np.arange(n) + 0.5) * sample_rate / (2 * n)
    return model_for(freqs, sample_rate).threshold(frame_power)
