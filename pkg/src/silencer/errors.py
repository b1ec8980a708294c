class SilencerError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ValidationError(SilencerError, ValueError):
    exit_code = 2


class ParseError(ValidationError):
    pass


class NumericalError(SilencerError, ArithmeticError):
    """A factor matrix became NaN or infinite."""

    exit_code = 3
