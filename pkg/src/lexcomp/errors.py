"""Exception hierarchy shared across the toolkit.

Every error the library raises deliberately derives from LexcompError so the
CLI can turn any of them into a one-line diagnostic and a nonzero exit code.
"""


class LexcompError(Exception):
    """Base class for all toolkit errors."""


class DataError(LexcompError):
    """Malformed or unusable input data (bad rows, length mismatches, ...)."""


class FormatError(DataError):
    """A resource file exists but yields nothing parsable."""


class InconsistentCounts(DataError):
    """Frequency counts that cannot form a valid 2x2 contingency table."""


class ConfigurationError(LexcompError):
    """Schema, manifest, or parameter combinations that do not fit together."""


class TrainError(LexcompError):
    """Model training cannot proceed (e.g. empty training matrix)."""


class UndefinedCorrelation(LexcompError):
    """Pearson's r is undefined because one of the vectors is constant."""
