"""Exception hierarchy shared by every module."""


class PabisimError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(PabisimError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SumError(ParseError):
    """A distribution literal whose weights do not add up to 1."""


class DistributionError(PabisimError, ValueError):
    pass


class CoefficientError(PabisimError, ValueError):
    pass


class ArityError(PabisimError, ValueError):
    pass


class ShapeError(PabisimError, ValueError):
    pass


class ChoiceError(PabisimError, ValueError):
    pass


class CapacityError(PabisimError):
    pass


class InputError(PabisimError, ValueError):
    pass
