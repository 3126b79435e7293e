"""Exception taxonomy shared by all modules.

The CLI maps these onto exit codes (2 for constraint/validation, 3 for
I/O and format problems) and the HTTP layer onto structured 4xx bodies.
"""


class RasterStepsError(Exception):
    """Base class for all package errors."""

    code = "error"


class FormatError(RasterStepsError):
    """Malformed or inconsistent on-disk data."""

    code = "format"


class EmptyDataError(RasterStepsError):
    """Dataset or series contains no usable (non-NaN) values."""

    code = "empty-data"


class BoundsError(RasterStepsError):
    """Index, region or range outside the valid domain."""

    code = "bounds"


class ConstraintError(RasterStepsError):
    """Selection parameters are inconsistent or infeasible."""

    code = "constraint"


class InvalidCodeError(RasterStepsError):
    """Latent code violates its invariants (e.g. zero norm)."""

    code = "invalid-code"
