"""Shared exception types.

Everything numerical in this package fails loudly. Domain violations
(wealth outside a utility's domain, infeasible observations) raise
subclasses of ValueError so callers can distinguish bad inputs from
solver trouble, which raises subclasses of RuntimeError.
"""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of a function."""


class RangeError(ValueError):
    """A value lies outside the image of a function being inverted."""


class InfeasibleObservationError(ValueError):
    """An observation has zero predictive mass under the current belief."""


class BudgetExceededError(RuntimeError):
    """A solver's node or path budget was exhausted before completion."""


class NonConvergenceError(RuntimeError):
    """An iterative solver failed to reach tolerance within its cap.

    Carries the last increment so callers can report how far off it was.
    """

    def __init__(self, message: str, last_increment: float | None = None):
        super().__init__(message)
        self.last_increment = last_increment
