"""Exception types shared across the toolkit."""


class StontError(Exception):
    """Base class for toolkit errors."""


class CorpusError(StontError):
    """Corpus file unreadable, malformed, or empty after filtering."""


class MatrixFormatError(StontError):
    """Embedding-matrix file fails structural or checksum validation."""


class AlignmentError(StontError):
    """Corpus ids and matrix rows do not form a bijection."""

    def __init__(self, message, missing=(), extra=()):
        super().__init__(message)
        self.missing = list(missing)
        self.extra = list(extra)


class ConfigError(StontError):
    """Pipeline configuration invalid or contains unknown keys."""


class StoreError(StontError):
    """Relational snapshot persistence or reload failure."""


class HarvestError(StontError):
    """Remote harvest failed after retries or rejected authentication."""
