"""Exception types shared across the toolkit."""


class TissueMaskError(Exception):
    """Base class for all toolkit errors."""


class InvalidParamError(TissueMaskError, ValueError):
    """A parameter value is outside its documented range."""


class DegenerateHistogramError(TissueMaskError):
    """All histogram mass sits in a single bin; no two-class split exists."""


class DimensionMismatchError(TissueMaskError, ValueError):
    """Two rasters that must share dimensions do not."""


class DuplicateStemError(TissueMaskError, ValueError):
    """Two image files share the same stem."""


class ManifestParseError(TissueMaskError, ValueError):
    """A manifest row is malformed.  Carries the 1-based line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class TooFewItemsError(TissueMaskError, ValueError):
    """Fewer items than folds."""


class EmptyInputError(TissueMaskError, ValueError):
    """An aggregate was requested over zero records."""
