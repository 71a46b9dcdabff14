"""Exception types raised across the package."""


class ContourEigError(Exception):
    """Base class for all structured errors raised by this package."""


class MatrixDataError(ContourEigError, ValueError):
    """Matrix storage is invalid: non-finite entries, wrong rank, bad indices."""


class DimensionMismatchError(ContourEigError, ValueError):
    """Operands have incompatible shapes."""


class ConfigurationError(ContourEigError, ValueError):
    """A configuration object violates its invariants."""


class GeneratorSpecError(ContourEigError, ValueError):
    """A test-pencil generation spec is inconsistent or infeasible."""


class ProblemSizeError(ContourEigError, ValueError):
    """Problem exceeds the size limit of a dense-only code path."""


class InputFormatError(ContourEigError, ValueError):
    """A file (matrix, config) could not be parsed."""


class SolveFailureError(ContourEigError, RuntimeError):
    """A numerical solve failed (factorization breakdown, too many bad nodes)."""


class EmptySubspaceError(SolveFailureError):
    """The assembled subspace is numerically zero; no eigenvalues detectable."""


class ContourProximityError(ContourEigError, ValueError):
    """An eigenvalue lies too close to the integration contour."""
