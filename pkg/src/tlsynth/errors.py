"""Exception types shared across the package.

Exit-code mapping used by the CLI: validation problems (bad documents,
bad arguments, malformed sequences) exit with 2; resource guards
(search spaces, table sizes, graph sizes) exit with 3.
"""


class TlsynthError(Exception):
    """Base class for all package errors."""


class ValidationFailure(TlsynthError):
    """Base for errors that indicate invalid user input (CLI exit 2)."""


class GuardExceeded(TlsynthError):
    """Base for errors that indicate a resource guard tripped (CLI exit 3)."""


class ParseError(ValidationFailure):
    """A document could not be parsed; carries the offending field path."""

    def __init__(self, message, field=None):
        self.field = field
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)


class ValidationError(ValidationFailure):
    """A parsed document violates a structural constraint."""


class NoMatchingRule(TlsynthError):
    """No cost rule matches a concrete window pair (incomplete problem)."""


class InfinityClash(TlsynthError):
    """(+inf) + (-inf) arose; the operation has no defined value."""


class UnsupportedAggregation(ValidationFailure):
    """Operation requires sum aggregation."""


class UnsupportedProblem(ValidationFailure):
    """Problem shape not supported by the requested construction."""


class NotAWalk(TlsynthError):
    """Edge sequence does not respect window successorship."""


class EmptyGraph(ValidationFailure):
    """Graph has no vertices."""


class GraphTooLarge(GuardExceeded):
    """Brute-force cycle enumeration guard tripped."""


class SearchSpaceTooLarge(GuardExceeded):
    """Candidate enumeration guard tripped; carries the exact count."""

    def __init__(self, count, guard):
        self.count = count
        self.guard = guard
        super().__init__(f"search space has {count} candidates (guard {guard})")


class TableTooLarge(GuardExceeded):
    """Rule-policy tabulation guard tripped."""


class InvalidHorizon(ValidationFailure):
    """Horizon outside the range an algorithm is defined for."""


class InvalidAlpha(ValidationFailure):
    """Migration-cost parameter outside the range an algorithm accepts."""
