"""Exception hierarchy shared by every fixlab module."""


class FixlabError(Exception):
    """Base class for all errors raised by fixlab."""


class InvalidInputError(FixlabError, ValueError):
    """Argument violates a documented precondition."""


class ExprSyntaxError(FixlabError):
    """Lexing or parsing failed; ``position`` is a byte offset into the source."""

    def __init__(self, message, position):
        super().__init__(f"{message} (at offset {position})")
        self.position = position


class UnboundVariableError(FixlabError, NameError):
    pass


class DomainError(FixlabError, ArithmeticError):
    """Real-valued evaluation left its domain (division by zero, bad power, ...)."""


class NonFiniteError(DomainError):
    """Evaluation produced inf or nan."""


class DivergenceError(FixlabError):
    """An iteration produced a non-finite iterate."""
