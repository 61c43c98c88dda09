"""Exception types shared across the package."""


class CheegerError(Exception):
    """Base class for all package errors."""


class DomainError(CheegerError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ValidationError(CheegerError, ValueError):
    """An input object violates a structural invariant."""


class ConstructionError(CheegerError, RuntimeError):
    """An exact geometric construction could not be completed."""


class SolverError(CheegerError, RuntimeError):
    """A numerical solve failed or produced an inconsistent result."""
