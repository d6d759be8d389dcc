"""Exception types shared across the package."""


class DimWitnessError(Exception):
    """Base class for all package-specific errors."""


class InvalidDimensionError(DimWitnessError, ValueError):
    """A dimension argument is zero, negative, or inconsistent."""


class DimensionMismatchError(DimWitnessError, ValueError):
    """Two objects that must share a dimension do not."""


class ContractViolationError(DimWitnessError, ValueError):
    """An input breaks a documented precondition (non-unitary matrix,
    unsorted singular values, bad weights, ...)."""


class NumericalDriftError(DimWitnessError, ArithmeticError):
    """A quantity that should be exact up to roundoff drifted beyond the
    allowed tolerance (imaginary residue, Hermiticity loss, ...)."""


class DefectiveEvolutionError(DimWitnessError, ArithmeticError):
    """Spectral analysis refused: the eigenvector basis is too
    ill-conditioned to trust."""


class IngestError(DimWitnessError, ValueError):
    """A serialized time series or counts file fails validation."""
