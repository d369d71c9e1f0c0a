"""Exception types raised across the package."""


class CavityChainError(Exception):
    """Base class for all package errors."""


class ConditionViolation(CavityChainError, ValueError):
    """Model parameters violate one or more admissibility conditions.

    ``violations`` lists a short tag for every failed condition.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class IndexOutOfRange(CavityChainError, IndexError):
    pass


class BadKind(CavityChainError, ValueError):
    pass


class LengthMismatch(CavityChainError, ValueError):
    pass


class SizeError(CavityChainError, ValueError):
    pass


class NonConvergent(CavityChainError, ArithmeticError):
    """An infinite product failed to settle within the iteration budget."""


class BudgetExceeded(CavityChainError, MemoryError):
    """Truncated Fock space larger than the configured dimension budget."""


class StepTooLarge(CavityChainError, RuntimeError):
    """Time step produced trace drift or non-finite values."""


class ConfigError(CavityChainError, ValueError):
    pass
