"""Exception hierarchy shared by all modules.

Each class maps onto one CLI exit code (see :mod:`minmaxspec.cli`).
"""


class MinMaxError(Exception):
    """Base class for every error raised by this package."""


class PreconditionError(MinMaxError, ValueError):
    """An input violates the documented precondition of an operation."""


class NotIrreducibleError(PreconditionError):
    pass


class ConvergenceError(MinMaxError, ArithmeticError):
    """An iteration hit its cap before meeting its tolerance.

    ``estimate`` carries the last iterate (or eigenvalue estimate) so the
    caller can decide whether it is usable.
    """

    def __init__(self, message, estimate=None, iterations=None):
        super().__init__(message)
        self.estimate = estimate
        self.iterations = iterations


class NonterminationError(ConvergenceError):
    """Policy iteration exceeded its step budget (usually a tie-break problem)."""


class SingularSystemError(MinMaxError, ArithmeticError):
    pass


class NilpotentError(MinMaxError):
    """The requested object is undefined because the relevant matrix is nilpotent."""


class ClosureTooLarge(MinMaxError):
    def __init__(self, size, cap):
        super().__init__(
            f"closure has {size} matrices, cap is {cap}; use the recursive strategy"
        )
        self.size = size
        self.cap = cap


class ParseError(MinMaxError, ValueError):
    def __init__(self, message, line=None, column=None):
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "")
            where += ": "
        super().__init__(where + message)
        self.line = line
        self.column = column


class ContractViolation(PreconditionError):
    """A user-supplied operator broke its contract (e.g. returned a negative entry)."""
