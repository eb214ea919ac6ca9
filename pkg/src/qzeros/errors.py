"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes, so keep the classes distinct.
"""


class QZerosError(Exception):
    """Base class for all library errors."""


class DomainError(QZerosError, ValueError):
    """A parameter lies outside the region where the object is defined."""


class NonConvergenceError(QZerosError, ArithmeticError):
    """A series or iteration did not reach its tolerance within the cap.

    ``best`` carries whatever partial result was available (best iterates
    for root finding, partial sum for series evaluation).
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class GuardFailure(QZerosError, ArithmeticError):
    """A numerical safety guard (Rouche sampling, stability) did not hold.

    Usually fixed by raising precision or the truncation degree.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class InconsistencyError(QZerosError, ArithmeticError):
    """Two independent certificates disagree (precision exhausted or clustered roots)."""


class CostGuardError(QZerosError, ValueError):
    """A requested enumeration exceeds the configured work budget."""
