"""Exception types shared across the audit engine."""


class AuditError(Exception):
    """Base class for all errors raised by this package."""


class InvalidConfig(AuditError):
    """A test, estimator, or session configuration violates its invariants."""


class OutOfRange(AuditError):
    """A supplied value lies outside its admissible interval."""


class StepAfterFinish(AuditError):
    """A finished sequential test was asked to consume another draw."""


class DegenerateNull(AuditError):
    """The conditional null mean leaves no admissible alternative."""


class EmptyContest(AuditError):
    """Reported tallies describe a contest with no ballot cards."""


class InfeasibleCounts(AuditError):
    """A population spec's point masses do not fit in the population size."""


class MissingCell(AuditError):
    """A summary was requested over a grid with an absent method/condition cell."""


class Exhausted(AuditError):
    """No sampling units remain to draw."""


class SessionClosed(AuditError):
    """The audit session is no longer open for the requested operation."""


class StaleSequence(AuditError):
    """An interpretation arrived for a sequence number that is not pending."""
