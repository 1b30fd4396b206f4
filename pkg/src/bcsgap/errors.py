"""Exception types raised by the solver stack."""


class BCSGapError(Exception):
    """Base class for all package errors."""


class NodalSingularityError(BCSGapError, ArithmeticError):
    """Raised where both the gap and the dispersion vanish and a value is undefined."""


class SingularOperatorError(BCSGapError, ArithmeticError):
    """Raised when a circulant solve hits an (almost) vanishing eigenvalue."""

    def __init__(self, message, frequency=None, eigenvalue=None):
        super().__init__(message)
        self.frequency = frequency
        self.eigenvalue = eigenvalue


class ConfigError(BCSGapError, ValueError):
    """Invalid run configuration; ``line`` and ``key`` locate the problem when known."""

    def __init__(self, message, key=None, line=None):
        where = []
        if key is not None:
            where.append(f"key {key!r}")
        if line is not None:
            where.append(f"line {line}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.key = key
        self.line = line
