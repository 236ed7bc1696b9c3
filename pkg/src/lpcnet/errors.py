"""Exception hierarchy shared across the package."""


class LpcnetError(Exception):
    """Base class for all errors raised by this package."""


class InsufficientSamplesError(LpcnetError):
    """An analysis window extends past the available audio."""


class DegenerateAutocorrelationError(LpcnetError):
    """Levinson-Durbin hit a reflection coefficient with magnitude >= 1."""


class WavFormatError(LpcnetError):
    """A WAV file is not PCM 16-bit mono 16 kHz."""


class FeatureFileError(LpcnetError):
    """A feature file does not contain whole little-endian float32 records."""


class WeightFormatError(LpcnetError):
    """Base class for weight-file parsing failures."""


class BadMagicError(WeightFormatError):
    pass


class VersionMismatchError(WeightFormatError):
    pass


class TruncatedFileError(WeightFormatError):
    pass


class ChecksumError(WeightFormatError):
    pass


class TensorShapeError(WeightFormatError):
    """A tensor is missing or its dimensions are inconsistent."""
