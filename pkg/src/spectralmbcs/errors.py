"""Exception hierarchy shared by all modules."""


class SpectralMBCSError(Exception):
    """Base class for every error raised by the package."""


class ConfigError(SpectralMBCSError, ValueError):
    """Malformed descriptor, inconsistent ports, invalid matrix."""


class DimensionError(SpectralMBCSError, ValueError):
    """Sizes of ports, permutations or matrices do not agree."""


class UnsupportedKindError(SpectralMBCSError, ValueError):
    pass


class DomainError(SpectralMBCSError, ValueError):
    """Parameter outside the range where a formula is defined."""


class SizeLimitError(SpectralMBCSError, ValueError):
    pass


class PreconditionError(SpectralMBCSError, ValueError):
    """A physics precondition of an operation is not met."""


class BinConditionError(PreconditionError):
    """The detector bin width would classically average the correlations.

    ``failed`` lists the names of the violated conditions
    (``"time_spread"`` and/or ``"bandwidth_ratio"``).
    """

    def __init__(self, message, failed=()):
        super().__init__(message)
        self.failed = tuple(failed)


class DegeneratePointError(SpectralMBCSError, ArithmeticError):
    """All unnormalized W-state coefficients vanish."""


class StateUnavailableError(SpectralMBCSError, LookupError):
    pass


class NumericalError(SpectralMBCSError, ArithmeticError):
    pass
