"""Exception taxonomy shared by all glyphrec modules.

The CLI maps these onto exit codes: ConfigurationError -> 1,
DataError (and subclasses) -> 2, NumericError -> 3.
"""


class GlyphrecError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(GlyphrecError):
    """A parameter value violates an operation's contract (bad grid size,
    component count out of range, empty class in a training call, ...)."""


class DataError(GlyphrecError):
    """Input data is unusable: missing files, malformed matrices, labels
    out of range."""


class ShapeError(DataError):
    """Array dimensions do not match what the operation requires."""


class EmptyCorpusError(DataError):
    """A corpus source yielded no classes or no samples."""


class EmptyGlyphError(DataError):
    """An image contains no foreground ink after binarization."""


class InsufficientPopulationError(DataError):
    """A class does not have enough samples to satisfy a split request."""


class NumericError(GlyphrecError):
    """A numerical routine failed to produce a usable result."""
