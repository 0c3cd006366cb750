"""Exception types shared across the package.

Validation problems (bad shapes, bad flags, malformed input) raise
ValidationError; numerical breakdowns (underflow, non-convergence,
rank deficiency) raise NumericalError.  The CLI maps the former to
exit status 1 and the latter to exit status 2.
"""


class ValidationError(ValueError):
    """Input fails a structural or domain precondition."""


class NumericalError(RuntimeError):
    """A computation failed for numerical reasons on valid input."""
