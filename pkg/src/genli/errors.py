"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where the quantity is defined or computable."""


class AccuracyError(ArithmeticError):
    """A computation did not reach its requested accuracy.

    The best available estimate and its error are attached so callers can
    decide whether to use it anyway.
    """

    def __init__(self, message, estimate=None, err=None):
        super().__init__(message)
        self.estimate = estimate
        self.err = err


class ResourceError(RuntimeError):
    """A request exceeds the configured memory or time budget."""


class ZeroTableError(ValueError):
    """Malformed zero-ordinate file; ``line`` is 1-based (None when not line-specific)."""

    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line
