"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Raised when an input violates a documented precondition."""


class TrainingDivergedError(RuntimeError):
    """Raised when a training loss or parameter turns non-finite."""
