"""Exception hierarchy shared across the package."""


class AqlabError(Exception):
    """Base class for all package errors."""


class AudioFormatError(AqlabError):
    """Unsupported or malformed audio file encoding."""


class ParameterError(AqlabError, ValueError):
    """Invalid DSP or generator parameter."""


class LoudnessError(AqlabError):
    """Loudness cannot be measured or normalized for this input."""


class ValidationError(AqlabError):
    """Structured input (CSV, JSON, submission) violates its schema."""


class ManifestError(AqlabError):
    """Stimulus directory or batch manifest is incomplete or inconsistent."""


class MetricError(AqlabError):
    """A metric is undefined for the given inputs."""


class StatsError(AqlabError):
    """A statistic is undefined for the given inputs."""


class GenerationError(AqlabError):
    """A condition cannot be generated (for example DE without stems)."""
