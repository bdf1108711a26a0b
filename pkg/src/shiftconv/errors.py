"""Exception types shared across the package."""


class InvalidArgument(ValueError):
    """An argument violates a documented precondition."""


class NoInverseError(InvalidArgument):
    """Raised when a residue has no inverse modulo q."""


class ConsistencyError(RuntimeError):
    """Two independent evaluation routes disagree beyond tolerance."""


class QuadratureError(RuntimeError):
    """A quadrature failed to converge.

    The last two estimates are kept so callers can judge how far off they were.
    """

    def __init__(self, message, estimates=()):
        super().__init__(message)
        self.estimates = tuple(estimates)


class DataFormatError(ValueError):
    """A spectral data file could not be parsed."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DataValidationError(ValueError):
    """Ingested spectral data violates a structural invariant."""

    def __init__(self, message, form_index=None, pair=None):
        if form_index is not None:
            message = f"form {form_index}: {message}"
        super().__init__(message)
        self.form_index = form_index
        self.pair = pair
