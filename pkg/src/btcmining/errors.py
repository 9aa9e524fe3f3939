"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where a formula is valid."""


class ConvergenceError(ArithmeticError):
    """An iterative evaluation did not reach its tolerance."""


class BudgetError(ValueError):
    """A request would exceed a fixed enumeration budget."""


class ConfigError(ValueError):
    """A simulation configuration document is malformed or inconsistent."""
