class FnsError(Exception):
    """Base class for every error raised by the calculus engine."""


class ChartMismatch(FnsError, ValueError):
    pass


class DimensionMismatch(FnsError, ValueError):
    pass


class MixedDegrees(FnsError, ValueError):
    pass


class DegreeTooHigh(FnsError, ValueError):
    pass


class NotScalarForm(FnsError, TypeError):
    pass


class BadValence(FnsError, TypeError):
    pass


class NotCotangent(FnsError, ValueError):
    pass


class NotHorizontal(FnsError, ValueError):
    pass


class NotHomogeneous(FnsError, ValueError):
    pass


class NotClosed(FnsError, ValueError):
    pass


class InvalidPoisson(FnsError, ValueError):
    pass


class MetricFileError(FnsError, ValueError):
    pass


class DslSyntaxError(FnsError):
    """Parse error in the expression language; `position` is a character offset."""

    def __init__(self, message, position):
        super().__init__(f"{message} (at offset {position})")
        self.position = position


class UnknownOperator(FnsError):
    pass


class ArityError(FnsError):
    pass


class UnboundSymbol(FnsError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class UnknownSuite(FnsError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class InvalidConfig(FnsError, ValueError):
    pass
