"""Exception types shared across the package."""


class InvalidParameterError(ValueError):
    """A model parameter is outside its valid range."""


class PoleError(InvalidParameterError):
    """A function was evaluated at one of its poles."""


class DivergenceError(ArithmeticError):
    """The requested quantity is infinite for the given parameters."""


class ConvergenceError(ArithmeticError):
    """Numerical integration did not reach the requested tolerance.

    The best available estimate and its error bound are kept on the
    exception so callers can decide whether to use them anyway.
    """

    def __init__(self, message, estimate, error):
        super().__init__(message)
        self.estimate = estimate
        self.error = error
