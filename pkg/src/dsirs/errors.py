"""Typed errors shared across the library.

Every error carries a human-readable message naming the offending field or
resource so CLI diagnostics stay actionable.
"""


class DsirsError(Exception):
    """Base class for all library errors."""


class ValidationError(DsirsError):
    """An instance or plan failed an invariant check."""


class UnequalTotals(ValidationError):
    pass


class PriceExceedsMaxUtility(ValidationError):
    pass


class NegativeValue(ValidationError):
    pass


class DuplicateName(ValidationError):
    pass


class NotAPartition(ValidationError):
    pass


class EmptyInput(ValidationError):
    pass


class ZeroTotalUtility(DsirsError):
    """Both agents value every resource at zero; no equalization target exists."""


class Infeasible(DsirsError):
    """No feasible plan satisfies the requested objective."""


class InstanceTooLarge(DsirsError):
    """Instance exceeds the solver's enumeration cap."""


class BadGuess(DsirsError):
    """A scaling guess designates a missing resource or admits no values."""


class MalformedRow(ValidationError):
    pass


class RowSumNot1000(ValidationError):
    pass


class SameAgentSampled(ValidationError):
    pass
