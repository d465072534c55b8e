"""Exception hierarchy shared by every lambdacool module."""


class LambdaCoolError(Exception):
    """Base class for all library errors."""


class ValidationError(LambdaCoolError, ValueError):
    """A physical parameter violates its invariant.

    ``field`` names the offending parameter so callers (and the CLI) can
    point at the exact config key.
    """

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class NonPositiveLinewidth(ValidationError):
    pass


class InputCouplingExceedsTotal(ValidationError):
    pass


class NegativePower(ValidationError):
    pass


class NumericalError(LambdaCoolError, ArithmeticError):
    """Base for failures of the numerics rather than of the inputs."""


class SingularResponse(NumericalError):
    """Response denominator vanished: gain cancels loss (lasing threshold)."""


class DegenerateDenominator(NumericalError):
    pass


class GridTooCoarse(NumericalError):
    pass


class GridTooNarrow(ValidationError):
    def __init__(self, message):
        super().__init__("p_max", message)


class NoConvergence(NumericalError):
    pass


class ParametricInstability(NumericalError):
    """Total mechanical damping is not positive; no steady occupation exists."""


class UnknownFigure(LambdaCoolError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "unknown figure"


class ConfigError(LambdaCoolError):
    pass


class ParseError(ConfigError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + where)


class ConfigValidationError(ConfigError, ValueError):
    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")
