"""aqlab: controlled audio-coding degradations, MUSHRA testing, and
objective-metric benchmarking."""

from .buffer import AudioBuffer, downmix_mono, ms_decode, ms_encode
from .errors import (
    AqlabError,
    AudioFormatError,
    GenerationError,
    LoudnessError,
    ManifestError,
    MetricError,
    ParameterError,
    StatsError,
    ValidationError,
)
from .filters import lowpass
from .generate import (
    ANCHOR_CUTOFFS,
    apply_lp,
    apply_pe,
    apply_sh,
    apply_tm,
    apply_un,
    generate_anchor,
    generate_condition,
    generate_reference,
    remix_de,
)
from .loudness import BELOW_GATE, integrated_loudness, normalize_loudness
from .masking import MaskingModel, masking_threshold
from .mdct import MdctConfig, imdct, mdct
from .params import (
    ArtifactParams,
    DeParams,
    LpParams,
    PeParams,
    ProcessingMethod,
    QualityLevel,
    ShParams,
    TmParams,
    UnParams,
    params_for,
)
from .stft import Spectrogram, StftConfig, istft, stft
from .waveio import read_wav, write_wav

__version__ = "0.1.0"
