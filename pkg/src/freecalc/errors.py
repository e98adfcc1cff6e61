"""Exception types shared across the toolkit."""


class FreecalcError(Exception):
    """Base class for every error raised by this package."""


class InvalidInput(FreecalcError):
    """Malformed or inconsistent input data (shapes, finiteness, emptiness)."""


class ArityError(FreecalcError):
    """A variable index or tuple arity does not match the declared arity."""


class ConditioningError(FreecalcError):
    """A conjugating map is singular or exceeds the condition-number cap."""


class ParseError(FreecalcError):
    """Syntax error in the expression language, with a character offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"syntax error at offset {position}: {message}")
        self.position = position


class SingularError(FreecalcError):
    """A matrix inverse failed; carries the offending subexpression."""

    def __init__(self, message: str, expr=None):
        super().__init__(message)
        self.expr = expr


class DilationError(FreecalcError):
    """The dilated evaluation point stayed outside the regularity domain
    even after shrinking the off-diagonal scale to its floor."""


class DegenerateDerivative(FreecalcError):
    """The linearized system is numerically non-injective at an iterate."""

    def __init__(self, message: str, iterate=None, trace=None):
        super().__init__(message)
        self.iterate = iterate
        self.trace = trace


class StallError(FreecalcError):
    """Backtracking produced no residual decrease after the halving budget."""

    def __init__(self, message: str, iterate=None, trace=None):
        super().__init__(message)
        self.iterate = iterate
        self.trace = trace


class RangeError(FreecalcError):
    """A degree or dimension parameter is out of the representable range."""


class DemoInsufficient(FreecalcError):
    """Too few usable sequence members remain to select a subsequence."""
