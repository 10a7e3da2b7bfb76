class IrsaError(Exception):
    """Base class for all toolkit errors."""


class DomainError(IrsaError, ValueError):
    """An argument lies outside the domain of a function."""


class DistributionError(IrsaError, ValueError):
    """A degree distribution is malformed or degenerate."""


class ConfigError(IrsaError, ValueError):
    """A simulation or search configuration is inconsistent."""


class BracketError(IrsaError, ArithmeticError):
    """The initial load bracket does not straddle the threshold."""


class NonConvergenceError(IrsaError, ArithmeticError):
    pass
