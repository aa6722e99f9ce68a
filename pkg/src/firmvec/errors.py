"""Exception hierarchy shared by all engine modules.

Everything user-facing derives from EngineError; the CLI maps EngineError
to exit code 2 (bad input/data) and anything else to exit code 1.
"""


class EngineError(Exception):
    """Base class for all errors raised by this package."""


class InputError(EngineError):
    """Invalid argument, dimension mismatch, or malformed request."""


class ParseError(InputError):
    """A data file could not be parsed; message names file and position."""


class SnapshotFormatError(ParseError):
    """Snapshot container is corrupt, truncated, or has an unsupported version."""


class ConfigurationError(InputError):
    """Required configuration (e.g. a stopword file) is missing or unusable."""


class UnknownEntityError(InputError):
    """A query named a firm or word that resolves to nothing."""


class DomainError(EngineError):
    """Mathematically undefined operation, e.g. cosine of a zero vector."""


class FitError(EngineError):
    """A model fit could not proceed (too few rows, degenerate classes, ...)."""


class EvaluationError(EngineError):
    """An evaluation is undefined for the given data (e.g. too few pairs)."""
