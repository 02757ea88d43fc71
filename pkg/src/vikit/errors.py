"""Exception types shared across the toolkit."""


class VikitError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(VikitError):
    """An input value violates a structural requirement (shape, finiteness, ...)."""


class DimensionMismatchError(ValidationError):
    """A vector or matrix does not match the ambient dimension."""

    def __init__(self, expected: int, actual: int, what: str = "vector"):
        self.expected = expected
        self.actual = actual
        super().__init__(f"{what} has dimension {actual}, expected {expected}")


class ConfigurationError(VikitError):
    """Solver or checker parameters violate a precondition."""


class DivergenceError(VikitError):
    """An iterate left the representable range."""

    def __init__(self, iteration: int):
        self.iteration = iteration
        super().__init__(f"non-finite iterate at iteration {iteration}")
