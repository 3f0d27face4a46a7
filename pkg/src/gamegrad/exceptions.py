"""Exception types shared across the package."""


class EvaluationError(ArithmeticError):
    """A loss produced a non-finite value or hit a singularity (e.g. 1/0).

    ``point`` is the real-valued parameter vector being evaluated and
    ``coordinate`` the seeded coordinate of the forward pass, when known.
    """

    def __init__(self, message, point=None, coordinate=None):
        super().__init__(message)
        self.point = None if point is None else tuple(float(x) for x in point)
        self.coordinate = coordinate


class ConfigError(ValueError):
    """Experiment configuration failed to parse or validate."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
