"""Exception hierarchy.

Every error carries the process exit code the CLI maps it to, so the
numbering stays stable in one place.
"""


class ShiftFloquetError(Exception):
    exit_code = 1


class ParseError(ShiftFloquetError):
    """Malformed problem file or expression."""

    exit_code = 2


class ExpressionSyntaxError(ParseError):
    def __init__(self, message, line=1, column=1, expected=()):
        self.line = line
        self.column = column
        self.expected = tuple(sorted(set(expected)))
        where = f"line {line}, column {column}"
        if self.expected:
            message = f"{message} at {where}; expected one of: {', '.join(self.expected)}"
        else:
            message = f"{message} at {where}"
        super().__init__(message)


class UnknownIdentifier(ExpressionSyntaxError):
    pass


class ArityError(ExpressionSyntaxError):
    pass


class InvariantViolation(ShiftFloquetError):
    exit_code = 3

    def __init__(self, check, detail=""):
        self.check = check
        msg = f"invariant violated: {check}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class NotInScale(ShiftFloquetError, ValueError):
    exit_code = 3


class NoSuccessor(ShiftFloquetError, ValueError):
    exit_code = 3


class OutOfDomain(ShiftFloquetError, ValueError):
    exit_code = 3


class Critical(ShiftFloquetError):
    """The homogeneous system has a nonzero periodic solution."""

    exit_code = 4


class NotContractive(ShiftFloquetError):
    exit_code = 5


class NumericalFailure(ShiftFloquetError):
    exit_code = 6


class NotRegressive(NumericalFailure):
    def __init__(self, point, detail=""):
        self.point = point
        msg = f"I + mu(t)A(t) is singular at t={point!r}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class SingularM(NumericalFailure):
    pass


class LogBranchFailure(NumericalFailure):
    pass


class EvalDomain(NumericalFailure):
    """Expression evaluated outside its domain (ln of nonpositive, 1/0, ...)."""


class MaxIterExceeded(ShiftFloquetError):
    exit_code = 7
