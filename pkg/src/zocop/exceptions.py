"""Exception types shared across the package."""


class ZocopError(Exception):
    """Base class for all package errors."""


class ValidationError(ZocopError, ValueError):
    """Invalid argument, configuration, or input data."""


class DimensionMismatchError(ValidationError):
    """Array shapes are inconsistent with the problem dimensions."""


class InvalidObjectiveError(ValidationError):
    """Objective returned a non-finite value or gradient."""


class RankDeficiencyError(ZocopError):
    """A is not full row rank where the certified parameter rules need it."""


class UnsupportedVariantError(ZocopError):
    """Requested update rule needs structure the problem does not carry."""


class DivergenceError(ZocopError):
    """Merit or Lyapunov value became non-finite; parameters are mis-set."""


class ParseError(ZocopError):
    """Malformed input file."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
