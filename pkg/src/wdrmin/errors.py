"""Exception hierarchy shared by all modules."""


class WdrError(Exception):
    """Base class for solver errors."""


class DimensionError(WdrError, ValueError):
    """Ground set too large for an exhaustive routine."""


class StochasticOracleError(WdrError, ValueError):
    """An exhaustive routine was handed a stochastic oracle."""


class ElementPresentError(WdrError, ValueError):
    """Marginal gain requested for an element already in the set."""


class NotMonotoneError(WdrError, ValueError):
    """The function is not monotone in the requested direction.

    ``element`` and ``subset`` give a marginal F(element | subset) with the
    wrong sign.
    """

    def __init__(self, message, element=None, subset=None, marginal=None):
        super().__init__(message)
        self.element = element
        self.subset = subset
        self.marginal = marginal


class DegenerateError(WdrError, ValueError):
    """Every term needed to form a ratio has a zero denominator."""


class NotNormalizedError(WdrError, ValueError):
    pass


class ConfigError(WdrError, ValueError):
    pass


class NotPositiveDefiniteError(WdrError, ValueError):
    """Cholesky pivot fell below tolerance at ``pivot`` (0-based)."""

    def __init__(self, message, pivot=None):
        super().__init__(message)
        self.pivot = pivot


class SingularSystemError(WdrError, ValueError):
    pass


class DimacsParseError(WdrError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
