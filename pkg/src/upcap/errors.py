"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument violates the precondition of the operation it was passed to."""


class DegenerateCondenserError(DomainError):
    """The plate of a condenser touches the boundary of its open set."""


class NonConvergenceError(RuntimeError):
    """An iterative solver stopped before reaching the requested residual."""


class CrossValidationError(RuntimeError):
    """Two independent routes to the same quantity disagree beyond tolerance."""
