"""Exception types shared across the toolkit.

The CLI maps these onto exit codes: invalid arguments exit with 2,
numeric or generation failures with 3.
"""


class InvalidArgumentError(ValueError):
    """Inputs violate a documented precondition (shape, range, kind)."""


class NumericFailureError(RuntimeError):
    """A solver or training run produced non-finite values."""


class GenerationFailureError(RuntimeError):
    """A randomized generator could not reach its target within its budget."""
