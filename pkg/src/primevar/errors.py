"""Exception hierarchy. ``exit_code`` is what the CLI returns for each."""


class PrimevarError(Exception):
    exit_code = 2


class DomainError(PrimevarError, ValueError):
    pass


class NonConvergent(PrimevarError):
    exit_code = 3


class FamilyTooSmall(PrimevarError):
    exit_code = 3


class PoleError(DomainError):
    pass


class PrecisionLoss(PrimevarError):
    exit_code = 3


class CountMismatch(PrimevarError):
    """Zero count disagrees with the Riemann-von Mangoldt prediction."""
    exit_code = 3


class ParseError(PrimevarError):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class SymmetryViolation(PrimevarError):
    exit_code = 3


class IncompleteTable(PrimevarError):
    exit_code = 3


class ScaleTooLarge(PrimevarError):
    pass


class ModeError(PrimevarError):
    pass


class NotFound(PrimevarError):
    exit_code = 3


class QualityMiss(PrimevarError):
    exit_code = 3

    def __init__(self, message, best=None):
        self.best = best
        super().__init__(message)


class SyncFailed(PrimevarError):
    exit_code = 3


class TailDominates(PrimevarError):
    exit_code = 3
