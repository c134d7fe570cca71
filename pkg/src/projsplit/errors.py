"""Exception types shared across the package."""


class InvalidParameterError(ValueError):
    """A numeric parameter is outside its documented range."""


class ShapeError(ValueError):
    """Vector or block dimensions do not match."""


class DivergenceError(RuntimeError):
    """An iterate became non-finite or exceeded the norm cap.

    Carries the last iteration that was still finite and whatever trace
    rows were collected before the blow-up.
    """

    def __init__(self, message, last_finite_iteration, partial_trace=None):
        super().__init__(message)
        self.last_finite_iteration = last_finite_iteration
        self.partial_trace = partial_trace if partial_trace is not None else []


class StalledLinesearchError(RuntimeError):
    """Backtracking failed to find an acceptable stepsize within the cap."""


class ParseError(ValueError):
    """Malformed input data; carries the 1-based line number."""

    def __init__(self, message, line_number):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class EstimationError(RuntimeError):
    """A numerical estimation procedure failed to converge."""


class ManifestError(ValueError):
    """A run manifest is missing required fields or fails validation."""
