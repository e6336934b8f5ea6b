"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Input data violates a documented contract (shapes, norms, priors, formats)."""


class LinearDependenceError(ValidationError):
    """States are linearly dependent, so unambiguous discrimination is impossible."""
