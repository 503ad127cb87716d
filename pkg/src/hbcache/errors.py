"""Exception types raised across the simulator."""


class HBCacheError(Exception):
    """Base class for all simulator errors."""


class InvalidParameter(HBCacheError, ValueError):
    """An argument violates an operation's preconditions."""


class InvalidNode(HBCacheError, IndexError):
    """A node or Home-Box id is out of range."""


class ParseError(HBCacheError, ValueError):
    """Malformed input text.

    ``location`` is a line number for line-oriented files and a dotted key
    path for configuration documents.
    """

    def __init__(self, message, location=None):
        self.location = location
        if location is not None:
            message = f"{location}: {message}"
        super().__init__(message)


class ValidationError(HBCacheError, ValueError):
    """A well-formed configuration violates an invariant."""


class EmptyRunError(HBCacheError, ValueError):
    """A cost or report was requested over zero measured requests."""
