"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: UsageError -> 2, PreconditionError -> 3,
anything else -> 4.
"""


class UsageError(ValueError):
    """Malformed arguments or inputs: bad ids, invalid parameters, bad files."""


class SizeError(UsageError):
    """A construction exceeded float range or a size cap."""

    def __init__(self, message: str, achieved: int | None = None):
        super().__init__(message)
        self.achieved = achieved


class PreconditionError(RuntimeError):
    """An operation was called on inputs that violate its stated precondition."""


class InternalError(RuntimeError):
    """An internal invariant broke; indicates a bug, not a user error."""
