"""Exception hierarchy shared by all modules."""


class LogDecayError(Exception):
    """Base class for every error raised by the package."""


class BranchDomainError(LogDecayError, ValueError):
    """Argument lies on the excluded ray arg z = -pi/2 (the log branch cut)."""


class DomainError(LogDecayError, ValueError):
    """Real argument outside the domain of a special function."""


class SingularityError(LogDecayError, ValueError):
    """Evaluation at a singular point (e.g. a Hankel function at z = 0)."""


class ConstructionError(LogDecayError, ValueError):
    """A model or grid cannot be built from the supplied data."""


class GridError(LogDecayError, ValueError):
    """Radial grid does not align with model interfaces, or is too small."""


class AtSpectrumError(LogDecayError, ArithmeticError):
    """Matching Wronskian vanishes: lambda^2 is (numerically) an eigenvalue."""


class StabilityError(LogDecayError, ValueError):
    """Time step violates the CFL restriction."""


class QuadratureError(LogDecayError, ArithmeticError):
    """Quadrature failed to reach the requested accuracy.

    ``achieved`` carries the best error estimate obtained.
    """

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class FitDegeneracyError(LogDecayError, ArithmeticError):
    """Least-squares design matrix is too ill-conditioned to trust."""

    def __init__(self, message, condition_number=None):
        super().__init__(message)
        self.condition_number = condition_number


class IncompleteSplitError(LogDecayError, ValueError):
    """A detected p-resonance has no zero-energy time profile attached."""


class InsufficientDataError(LogDecayError, ValueError):
    """Time series too short for the requested decay-law test."""


class ContourSpecError(LogDecayError, ValueError):
    """Contour parameters violate the admissibility constraints."""
