"""Exception hierarchy shared by all modules."""


class GeometryError(Exception):
    """Base class for every error raised by the package."""


class StencilClippingError(GeometryError):
    """A finite-difference stencil would leave the chart domain."""


class DegenerateMetricError(GeometryError):
    """The metric is not positive definite (Cholesky failed)."""


class UnsupportedOrderError(GeometryError):
    """A derivative order beyond the supported range was requested."""


class ConvergenceError(GeometryError):
    """An iterative solver (log map shooting) did not converge."""


class NotFrenetError(GeometryError):
    """The covariant chain is rank deficient.

    Attributes
    ----------
    index : int
        First chain index k (0-based, ``nabla^k T``) found dependent.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class InsufficientJetError(GeometryError):
    """The jet order is too low for the requested quantity."""


class IncompatibleDataError(GeometryError):
    """Prescribed vectors violate the Gram condition of the curvature data.

    Attributes
    ----------
    worst : tuple of int
        1-based pair (i, j) with the largest residual.
    residual : float
        Absolute residual at ``worst``.
    """

    def __init__(self, message, worst=None, residual=None):
        super().__init__(message)
        self.worst = worst
        self.residual = residual


class DomainExitError(GeometryError):
    """A trajectory left the chart domain."""


class CurvaturePositivityError(GeometryError):
    """A curvature that must stay positive did not."""


class ClassMismatchError(GeometryError):
    """The asserted manifold class failed its spot check."""


class UnknownPresetError(GeometryError):
    """The preset name or its parameters are not recognised."""


class ConfigError(GeometryError):
    """Invalid run configuration."""


class InvalidFrameError(GeometryError):
    """An initial frame is not g-orthonormal or not positively oriented."""
