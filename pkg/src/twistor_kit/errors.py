"""Exception hierarchy shared by all twistor_kit modules."""


class TwistorKitError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(TwistorKitError):
    """Input matrix is not square, has odd size, or sizes do not match."""


class InvalidStructureError(TwistorKitError):
    """A matrix fails the complex-structure invariants (square to -1, det > 0)."""


class DegeneratePairError(TwistorKitError):
    """Two complex structures are (anti)proportional and span no sphere."""


class NotCosphericalError(TwistorKitError):
    """A pair/triple of complex structures does not lie on a common twistor sphere."""


class NormalizationError(TwistorKitError):
    """Sphere coordinates are not on the unit sphere."""


class ToleranceError(TwistorKitError):
    """A rank decision is ambiguous: singular values sit near the cutoff."""


class OutsideChartError(TwistorKitError):
    """The point leaves the normalized period-matrix chart (block C singular)."""


class SamplingError(TwistorKitError):
    """Too many sampled sphere points fell outside the chart."""


class WrongSubgroupError(TwistorKitError):
    """A group element does not commute with the required structure."""


class NoConvergenceError(TwistorKitError):
    """The path solver did not reach the requested residual."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class DegenerateProblemError(TwistorKitError):
    """The sphere triple of a solve is linearly dependent."""


class PathingError(TwistorKitError):
    """A global twistor path could not be assembled."""


class ModeError(TwistorKitError):
    """Exact-arithmetic mode was requested on non-rational input."""


class DegenerateInputError(TwistorKitError):
    """A required nonzero input (e.g. an alternating form) is zero."""


class InvalidFormError(TwistorKitError):
    """An alternating form is outside the expected invariant family."""


class UnsupportedSizeError(TwistorKitError):
    """The operation is only implemented for a specific matrix size."""


class SingularityError(TwistorKitError):
    """A form that must be nondegenerate is (numerically) singular."""


class PreconditionError(TwistorKitError):
    """A documented operation precondition is violated."""
