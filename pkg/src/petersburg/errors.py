"""Exception types shared across the package."""


class DomainError(ValueError):
    """An input violates a documented precondition."""


class NegativeAmountError(DomainError):
    """Log-domain arithmetic would produce a negative monetary amount."""


class DiagnosticError(RuntimeError):
    """An internal consistency check failed (e.g. analytic tag vs numeric probe)."""
