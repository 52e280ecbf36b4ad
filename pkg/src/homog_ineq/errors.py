"""Exception and warning types shared by all modules."""


class InvalidInputError(ValueError):
    """An argument is outside the domain of the operation."""


class UnsupportedError(NotImplementedError):
    """The requested configuration is outside what the model supports."""


class TruncationError(RuntimeError):
    """A field does not decay enough at the ends of the log-radial grid."""

    def __init__(self, message, magnitude=None):
        super().__init__(message)
        self.magnitude = magnitude


class NumericError(ArithmeticError):
    """Non-finite values appeared during a computation."""

    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


class PreconditionError(ValueError):
    """The hypotheses of a named inequality are not satisfied."""

    def __init__(self, message, inequality=None):
        super().__init__(message)
        self.inequality = inequality


class TruncationWarning(RuntimeWarning):
    """Some mass was lost at the grid ends; the result is still returned."""


class ConfigError(InvalidInputError):
    """A model or suite file is malformed; ``where`` locates the problem."""

    def __init__(self, message, where=None):
        super().__init__(f"{where}: {message}" if where else message)
        self.where = where
