"""Exception hierarchy; every error the CLI renders derives from QentError."""

from __future__ import annotations


class QentError(Exception):
    pass


class ParseError(QentError):
    def __init__(self, message: str, position: int | None = None, text: str | None = None):
        self.position = position
        self.text = text
        if position is not None:
            message = f"{message} (column {position + 1})"
        super().__init__(message)


class CycleDetected(QentError):
    pass


class DuplicateLabel(QentError):
    pass


class UnknownVertex(QentError):
    pass


class NotAComplex(QentError):
    pass


class NotMinimal(QentError):
    pass


class InvalidChainMap(QentError):
    pass


class NegativePowerOfNonInvertible(QentError):
    pass


class NonInvertibleFunctor(QentError):
    pass


class ZeroIterate(QentError):
    pass


class BudgetExceeded(QentError):
    """Raised internally when an iterate exceeds the summand cap or time budget."""


class AuditFailure(QentError):
    def __init__(self, clause: str, report=None):
        self.clause = clause
        self.report = report
        super().__init__(f"audit failed: {clause}")
