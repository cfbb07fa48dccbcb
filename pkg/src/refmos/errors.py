"""Exception types raised by the refmos library."""


class RefmosError(Exception):
    """Base class for all refmos errors."""


# --- audio decoding / pairing ---

class MalformedFileError(RefmosError):
    """File is not a readable RIFF/WAVE container."""


class UnsupportedEncodingError(RefmosError):
    """WAV encoding other than PCM16/24/32 or IEEE float32."""


class EmptyAudioError(RefmosError):
    """Decoded file contains zero samples."""


class SampleRateMismatchError(RefmosError):
    """Reference and degraded sample rates differ."""


class WrongModeRateError(RefmosError):
    """Sample rate does not match the selected mode (speech 16 kHz, audio 48 kHz)."""


class DurationTooShortError(RefmosError):
    """Signal too short to produce a single spectrogram patch."""


# --- spectrogram ---

class NonPositiveFrequencyError(RefmosError):
    """Frequency argument must be > 0."""


class InvalidRangeError(RefmosError):
    """Invalid band layout or frequency range."""


class SignalTooShortError(RefmosError):
    """Signal shorter than one analysis window."""


# --- similarity / alignment ---

class ShapeMismatchError(RefmosError):
    """Spectrogram or patch shapes do not match."""


class EmptyInputError(RefmosError):
    """Operation requires at least one element."""


class NoPatchesError(RefmosError):
    """No patches survive segmentation/masking; nothing to score."""


# --- MOS mapping ---

class DimensionMismatchError(RefmosError):
    """Feature vector dimension does not match the model."""


class InsufficientDataError(RefmosError):
    """Too few training rows for the requested cross-validation."""


class CorruptModelError(RefmosError):
    """Model file is truncated or fails to parse."""


class VersionMismatchError(RefmosError):
    """Model file was written by an unknown future format version."""


class InvalidSpecError(RefmosError):
    """Degradation specification is out of physical range."""
