"""Exception hierarchy shared by all modules."""


class LineFieldError(Exception):
    """Base class for every error raised by the package."""


class DomainError(LineFieldError, ValueError):
    pass


class InvalidCurveError(DomainError):
    pass


class TubeOverlapError(InvalidCurveError):
    """Raised when delta * max|kappa| >= 1, i.e. the tube would self-overlap."""


class ResolutionError(DomainError):
    pass


class MalformedDomainError(DomainError):
    pass


class FieldError(LineFieldError, ValueError):
    pass


class InvalidProjectionError(FieldError):
    pass


class RoughFieldError(FieldError):
    """Adjacent directions differ by almost pi/2, so a sign choice is ill-defined."""


class NotAGradientError(FieldError):
    pass


class InvalidLoopError(FieldError):
    pass


class InterpolationError(FieldError):
    pass


class ZeroMeasureError(FieldError):
    pass


class ConsistencyError(LineFieldError, RuntimeError):
    pass


class ParseError(LineFieldError, ValueError):
    """Structured parse failure; carries the file, line and field that failed."""

    def __init__(self, message, path=None, line=None, field=None):
        self.path = path
        self.line = line
        self.field = field
        where = []
        if path is not None:
            where.append(str(path))
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = ": ".join([", ".join(where)]) + ": " if where else ""
        super().__init__(prefix + message)


class SchemaError(LineFieldError, ValueError):
    pass
