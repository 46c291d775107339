"""Processing methods, quality levels, and the per-level generator presets."""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Union

from .errors import ParameterError
from .mdct import BLOCK_LENGTHS

__all__ = [
    "ProcessingMethod",
    "QualityLevel",
    "LpParams",
    "TmParams",
    "UnParams",
    "ShParams",
    "PeParams",
    "DeParams",
    "ArtifactParams",
    "params_for",
]


class ProcessingMethod(str, Enum):
    LP = "LP"  # low-pass / bandwidth limitation
    TM = "TM"  # tonality mismatch
    UN = "UN"  # unmasked noise
    SH = "SH"  # spectral holes
    PE = "PE"  # pre-echoes
    DE = "DE"  # dialogue enhancement (stimuli supplied externally)


class QualityLevel(str, Enum):
    Q1 = "Q1"  # worst
    Q2 = "Q2"
    Q3 = "Q3"
    Q4 = "Q4"
    Q5 = "Q5"  # best


@dataclass(frozen=True)
class LpParams:
    cutoff_hz: float

    def __post_init__(self):
        if self.cutoff_hz <= 0:
            raise ParameterError("LP cutoff must be positive")


@dataclass(frozen=True)
class TmParams:
    crossover_hz: float

    def __post_init__(self):
        if self.crossover_hz <= 0:
            raise ParameterError("TM crossover must be positive")


@dataclass(frozen=True)
class UnParams:
    crossover_hz: float
    seed: int = 0

    def __post_init__(self):
        if self.crossover_hz <= 0:
            raise ParameterError("UN crossover must be positive")


@dataclass(frozen=True)
class ShParams:
    hole_prob: float
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.hole_prob < 1.0:
            raise ParameterError(f"hole_prob must lie in (0, 1), got {self.hole_prob}")


@dataclass(frozen=True)
class PeParams:
    nmr_db: float
    block_length: int
    seed: int = 0

    def __post_init__(self):
        if self.block_length not in BLOCK_LENGTHS:
            raise ParameterError(
                f"PE block_length must be one of {BLOCK_LENGTHS}, got {self.block_length}"
            )


@dataclass(frozen=True)
class DeParams:
    attenuation_db: float = 20.0


ArtifactParams = Union[LpParams, TmParams, UnParams, ShParams, PeParams, DeParams]

_Q = (QualityLevel.Q1, QualityLevel.Q2, QualityLevel.Q3, QualityLevel.Q4, QualityLevel.Q5)

_PRESETS: dict[tuple[ProcessingMethod, QualityLevel], ArtifactParams] = {}

for _level, _hz in zip(_Q, (5000.0, 9000.0, 10500.0, 12000.0, 15000.0)):
    _PRESETS[(ProcessingMethod.LP, _level)] = LpParams(cutoff_hz=_hz)
for _level, _hz in zip(_Q, (3000.0, 5000.0, 7000.0, 9000.0, 10500.0)):
    _PRESETS[(ProcessingMethod.TM, _level)] = TmParams(crossover_hz=_hz)
    _PRESETS[(ProcessingMethod.UN, _level)] = UnParams(crossover_hz=_hz)
for _level, _p in zip(_Q, (0.70, 0.50, 0.30, 0.20, 0.10)):
    _PRESETS[(ProcessingMethod.SH, _level)] = ShParams(hole_prob=_p)
for _level, (_nmr, _block) in zip(
    _Q, ((10.0, 4096), (10.0, 2048), (10.0, 1024), (16.0, 2048), (16.0, 1024))
):
    _PRESETS[(ProcessingMethod.PE, _level)] = PeParams(nmr_db=_nmr, block_length=_block)


def params_for(
    method: ProcessingMethod, level: QualityLevel, seed: int | None = None
) -> ArtifactParams:
    """Preset generator parameters for one (method, quality level) cell.

    DE has no parametric preset beyond the remix attenuation and is
    rejected here. ``seed`` is stored on the stochastic methods (UN, SH,
    PE) when given.
    """
    method = ProcessingMethod(method)
    level = QualityLevel(level)
    if method is ProcessingMethod.DE:
        raise ParameterError("DE has no generator preset; DE stimuli are remixed from stems")
    params = _PRESETS[(method, level)]
    if seed is not None and isinstance(params, (UnParams, ShParams, PeParams)):
        params = replace(params, seed=int(seed))
    return params
