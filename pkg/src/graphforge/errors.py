"""Exception hierarchy shared by all generators.

Every error maps onto one CLI exit code (see ``exit_code``).
"""


class GraphForgeError(Exception):
    exit_code = 1


class InvalidParameterError(GraphForgeError, ValueError):
    """A parameter is outside its documented domain."""

    exit_code = 2


class InvalidProbabilityError(InvalidParameterError):
    pass


class InvalidWeightsError(InvalidParameterError):
    pass


class InfeasibleError(GraphForgeError, ValueError):
    """The parameters are well-formed but no output can satisfy them."""

    exit_code = 2


class NonGraphicalError(InfeasibleError):
    pass


class BudgetExceededError(GraphForgeError, RuntimeError):
    """A rejection loop ran out of attempts."""

    exit_code = 3


class UnsupportedInputError(GraphForgeError, ValueError):
    exit_code = 1


class DisconnectedGraphError(UnsupportedInputError):
    pass


def exit_code(exc: BaseException) -> int:
    return getattr(exc, "exit_code", 1)
