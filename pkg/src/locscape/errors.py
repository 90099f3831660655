"""Exception hierarchy shared by all modules."""


class LocscapeError(Exception):
    """Base class for every error raised by this package."""

    code = "error"


class DimensionError(LocscapeError, ValueError):
    code = "dimension_mismatch"


class NonFiniteError(LocscapeError, ValueError):
    code = "non_finite"


class ImaginaryResidueError(LocscapeError, ArithmeticError):
    code = "imaginary_residue"


class NotSymmetricError(LocscapeError, ValueError):
    code = "not_symmetric"


class ZeroIterateError(LocscapeError, ArithmeticError):
    """An iterate vanished exactly, so its logarithm is undefined."""

    code = "zero_iterate"

    def __init__(self, message, column=None, step=None):
        super().__init__(message)
        self.column = column
        self.step = step


class ConvergenceError(LocscapeError, ArithmeticError):
    code = "no_convergence"

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class DenseLimitError(LocscapeError, ValueError):
    code = "dense_limit"


class FormatError(LocscapeError, ValueError):
    code = "parse_failure"


class NormFallbackWarning(UserWarning):
    """Power iteration hit its iteration cap and the Gershgorin bound was used."""


class ThresholdWarning(UserWarning):
    """Fewer local maxima than requested were available."""


class DegeneratePotentialWarning(UserWarning):
    """The synthesized potential is constant."""
