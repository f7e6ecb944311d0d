"""Exception hierarchy for the cutproject package."""


class CutProjectError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(CutProjectError, ValueError):
    pass


class SingularMatrix(CutProjectError, ValueError):
    pass


class CyclicNotDense(CutProjectError, ValueError):
    pass


class InjectivityViolated(CutProjectError):
    """Two probed lattice points share a physical coordinate."""


class SignatureMismatch(CutProjectError, ValueError):
    """A weight function was used with an internal space of another shape."""


class UnsupportedKind(CutProjectError):
    pass


class RegionTooLarge(CutProjectError):
    """Enumeration would exceed the configured point cap."""


class TooFewPoints(CutProjectError):
    pass


class EpsTooSmall(CutProjectError, ValueError):
    pass


class WeightNotInKL(CutProjectError):
    """The weight carries no tag in K2/PK/KL, so the generalised PSF is refused."""


class ParseError(CutProjectError):
    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        where = []
        if field is not None:
            where.append(f"field {field!r}")
        if line is not None:
            where.append(f"line {line}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
