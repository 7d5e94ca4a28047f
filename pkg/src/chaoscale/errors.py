"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the documented domain of an operation."""


class ResolutionMismatch(DomainError):
    """Two grid-sampled objects were combined at incompatible resolutions."""


class EstimationError(RuntimeError):
    """A Monte-Carlo estimate could not be formed (e.g. zero event hits)."""
