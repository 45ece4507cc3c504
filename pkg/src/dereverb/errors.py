"""Exception hierarchy shared by all modules.

The CLI maps these onto process exit codes: parameter/validation problems
exit with 3, I/O problems with 2, numerical failures (NaN/Inf produced
where none is allowed) with 4.
"""


class DereverbError(Exception):
    """Base class for all toolkit errors."""


class ParameterError(DereverbError, ValueError):
    """A parameter or type invariant is violated (exit code 3)."""


class SampleRateMismatchError(ParameterError):
    """Two operands carry different sample rates."""


class InsufficientExcitationError(ParameterError):
    """A signal is too close to silence to identify anything from it."""


class NumericalError(DereverbError, ArithmeticError):
    """A computation produced NaN/Inf where the contract forbids it (exit code 4)."""
