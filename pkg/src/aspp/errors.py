"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Inputs violate a documented precondition (shapes, ranges, formats)."""


class DomainError(ValueError):
    """A rule received state values outside its domain."""


class NumericError(ArithmeticError):
    """A computation produced non-finite values."""


class GraphError(ValidationError):
    """A graph fails validation."""
