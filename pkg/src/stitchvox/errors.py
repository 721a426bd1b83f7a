"""Exception types shared across the package."""


class StitchVoxError(Exception):
    """Base class for all stitchvox failures."""


class AudioError(StitchVoxError):
    """Invalid audio parameters or buffer contents."""


class WavFormatError(AudioError):
    """Malformed or unsupported WAV file."""


class BankError(StitchVoxError):
    """Problem building, loading or querying a snippet bank."""


class MatchError(StitchVoxError):
    """Invalid matcher configuration (e.g. filler not in vocabulary)."""


class StitchError(StitchVoxError):
    """Sentence cannot be stitched (no tokens, unknown speaker, ...)."""


class DatasetError(StitchVoxError):
    """Problem converting or validating a dataset."""
