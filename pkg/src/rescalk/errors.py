"""Exception hierarchy.

Errors split into two families so the CLI can map them to exit codes:
input/configuration problems and numerical degeneracies.
"""


class RescalKError(Exception):
    """Base class for every error raised by this package."""

    kind = "error"


class InputError(RescalKError, ValueError):
    """Malformed input or configuration."""

    kind = "input"


class ShapeError(InputError):
    kind = "shape"


class InvalidRankError(InputError):
    kind = "invalid_rank"


class InvalidConfigError(InputError):
    kind = "invalid_config"


class TensorFileError(InputError):
    """Problem in a tensor file; ``line`` is 1-based when known."""

    kind = "parse"

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NumericalError(RescalKError, ArithmeticError):
    """Degenerate numerical situation (zero norms, collapsed factors, ...)."""

    kind = "numerical"


class DegenerateInputError(NumericalError):
    kind = "degenerate_input"


class DegenerateFactorError(NumericalError):
    kind = "degenerate_factor"

    def __init__(self, column, message=None):
        self.column = column
        super().__init__(message or f"factor column {column} has zero sum")


class DegenerateVectorError(NumericalError):
    kind = "degenerate_vector"


class GenerationError(NumericalError):
    kind = "generation_failure"
