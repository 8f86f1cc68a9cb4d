"""Exception types raised across the package."""


class EvtKMeansError(Exception):
    """Base class for package errors."""


class ParameterError(EvtKMeansError, ValueError):
    """Distribution parameters are invalid (non-positive scale, non-finite values)."""


class InputError(EvtKMeansError, ValueError):
    """Input data violates an operation's preconditions."""


class EmptyTailError(InputError):
    """No extreme-value sample could be extracted for a centroid."""


class InitializationError(EvtKMeansError, RuntimeError):
    """The optimizer's starting point has an infinite objective."""


class ContractError(EvtKMeansError, RuntimeError):
    """An operation was called on an object of the wrong kind."""


class ParseError(InputError):
    """A data file could not be parsed."""

    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno
