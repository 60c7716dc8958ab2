"""Exception hierarchy shared by all fiberlink modules."""


class FiberlinkError(ValueError):
    """Base class for every error raised by fiberlink."""


class NotFinite(FiberlinkError):
    pass


class NonPositiveCoupling(FiberlinkError):
    pass


class NegativeCoupling(FiberlinkError):
    pass


class NotNormalized(FiberlinkError):
    pass


class InvalidDensityMatrix(FiberlinkError):
    pass


class RangeExceeded(FiberlinkError):
    """Raised when |tau| exceeds the range where plain double trig is trusted."""


class EmptySeries(FiberlinkError):
    pass


class NonPositiveLength(FiberlinkError):
    pass


class ZeroDetuning(FiberlinkError):
    pass


class EigensolverFailure(FiberlinkError, ArithmeticError):
    pass


class ConfigError(FiberlinkError):
    """Invalid CLI configuration; ``field`` and ``line`` locate the offending entry."""

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
