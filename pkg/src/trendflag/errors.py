"""Exception and warning types shared across the package."""


class TrendflagError(Exception):
    """Base class for errors raised by this package."""


class UnsupportedOrderError(TrendflagError, ValueError):
    """Difference order outside the supported set {1, 2}."""


class InsufficientDataError(TrendflagError, ValueError):
    """Too few observed values for the requested operation."""


class NumericalFailureError(TrendflagError, ArithmeticError):
    """A filter or likelihood evaluation became numerically invalid."""


class EpochMismatchError(TrendflagError, ValueError):
    """Held-out observations do not line up with the forecast horizons."""


class EmptyWindowError(TrendflagError, ValueError):
    """An epoch window selects no observed values."""


class ParseError(TrendflagError, ValueError):
    """Malformed panel CSV or config document."""


class EmptyPanelError(ParseError):
    """Panel file has no series columns or no data rows."""


class ConfigError(TrendflagError, ValueError):
    """Invalid run configuration."""


class DegenerateVarianceWarning(UserWarning):
    """Training variance is zero; fits then require positive system noise."""


class DegenerateSdWarning(UserWarning):
    """Tail probability requested against a zero standard deviation."""


class SingularPredictedVarianceWarning(UserWarning):
    """Smoother met a singular predicted covariance; pseudo-inverse used."""


class ZeroJointProbabilityWarning(UserWarning):
    """Every Monte-Carlo replicate underflowed; joint probability is 0."""
