"""Exception and warning types shared across the package."""


class PhotodetectError(Exception):
    """Base class for package errors."""


class ParameterError(PhotodetectError, ValueError):
    """A parameter is outside its physical or structural range."""


class EnumerationLimitError(ParameterError):
    """A brute-force enumeration request exceeds the supported size."""


class ModelError(PhotodetectError):
    """The numerical model cannot be evaluated for these inputs."""


class TruncationError(ModelError):
    """An operation would move population above the photon-number cutoff."""


class CoverageError(ModelError):
    """A frequency grid does not cover the requested structure."""


class GridMismatchError(ModelError):
    """Two spectral objects live on different frequency grids."""


class KernelConstraintError(ModelError):
    """A detector response kernel violates the unit-efficiency bound."""


class ModelConsistencyWarning(UserWarning):
    """The literal model produced values outside strict probability bounds."""
