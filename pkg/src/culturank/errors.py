"""Exception hierarchy.

Every error raised on bad input derives from :class:`CulturankError`, which the
command line maps to exit status 1. Plain ``OSError`` is left untouched and maps
to exit status 2.
"""


class CulturankError(Exception):
    """Base class for validation errors."""


class ParseError(CulturankError, ValueError):
    """A structured input file could not be parsed."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


class IntegrityError(CulturankError):
    """Inputs are individually valid but inconsistent with each other."""


class GeometryError(CulturankError, ValueError):
    """A polygon ring violates closure or size requirements."""


class UnknownKeyError(CulturankError, KeyError):
    """A node, term or location id is not present."""

    def __str__(self):
        return str(self.args[0]) if self.args else ""


class EmptySampleError(CulturankError):
    """Nothing was left to aggregate."""


class DegenerateError(CulturankError):
    """A distribution has zero spread, so a z-score or fit is undefined."""


class InsufficientDataError(CulturankError):
    """Too few observations for the requested computation."""


class UndefinedMetricError(CulturankError):
    """A metric is undefined for a location (e.g. zero tags)."""


class SingularDesignError(CulturankError):
    """The regression design matrix is rank deficient."""

    def __init__(self, message, columns=()):
        self.columns = tuple(columns)
        super().__init__(message)
