"""Exception types shared across the package.

Everything derives from :class:`LevykitError` so callers can catch one base
class.  Input-validation problems additionally derive from ``ValueError`` and
numerical-quality problems from ``ArithmeticError``, which keeps plain-python
call sites idiomatic.
"""


class LevykitError(Exception):
    """Base class for all errors raised by levykit."""


class DomainError(LevykitError, ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class RangeError(LevykitError, ValueError):
    """A query point lies outside the tabulated range and no analytic
    extension is available."""


class UnsupportedSpecError(LevykitError, ValueError):
    """The operation only supports preset diffusions (it needs exact
    transition sampling or closed-form band statistics)."""


class IntegrabilityError(LevykitError, ArithmeticError):
    """A spectral measure fails the integrability condition required for the
    representation it is used in."""


class ToleranceError(LevykitError, ArithmeticError):
    """A quadrature or series evaluation could not certify the requested
    tolerance."""


class ResolutionError(LevykitError, ValueError):
    """Discretisation parameters are mutually inconsistent (for instance a
    local-time band narrower than one step's diffusive displacement)."""


class TruncationError(ToleranceError):
    """A series was truncated before its certified tail bound fell below the
    requested tolerance.

    Attributes
    ----------
    minimal_terms : int
        Smallest number of terms that would have been sufficient.
    """

    def __init__(self, message: str, minimal_terms: int):
        super().__init__(message)
        self.minimal_terms = minimal_terms


class ConsistencyError(LevykitError, ArithmeticError):
    """A computed value violates a structural constraint (probabilities
    outside [0, 1] beyond tolerance, and similar)."""
