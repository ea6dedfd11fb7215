"""Exception hierarchy.

Every error raised on purpose by the package derives from ``ScatteringError``
so callers (and the CLI) can separate computation failures from bugs.
"""


class ScatteringError(Exception):
    """Base class for deliberate failures."""


class InvalidGeometryError(ScatteringError, ValueError):
    pass


class AsymmetricPotentialError(ScatteringError, ValueError):
    """Raised when a construction needs a mirror-symmetric barrier."""

    def __init__(self, msg="symmetric potential required"):
        super().__init__(msg)


class UnsupportedEnergyError(ScatteringError, ValueError):
    pass


class OpacityOverflowError(ScatteringError, ArithmeticError):
    """Evanescent growth exceeds what double precision can carry.

    The message suggests log-scaled arithmetic; ``opacity`` is the summed
    kappa*width that tripped the threshold.
    """

    def __init__(self, opacity, threshold):
        self.opacity = opacity
        self.threshold = threshold
        super().__init__(
            f"evanescent opacity {opacity:.1f} exceeds {threshold:.1f}; "
            "use a log-scaled transfer computation for barriers this opaque"
        )


class DegenerateOddSolutionError(ScatteringError, ArithmeticError):
    pass


class SpectrumDomainError(ScatteringError, ValueError):
    pass


class StaleCacheError(ScatteringError, RuntimeError):
    pass


class DomainTooSmallError(ScatteringError, ValueError):
    def __init__(self, edge_density, threshold):
        self.edge_density = edge_density
        self.threshold = threshold
        super().__init__(
            f"packet density {edge_density:.2e} at the domain edge exceeds "
            f"{threshold:.1e}; widen the x-domain"
        )


class DiscretizationError(ScatteringError, ValueError):
    pass


class EmptyChannelError(ScatteringError, ValueError):
    pass


class ExtrapolationError(ScatteringError, ArithmeticError):
    """Richardson extrapolation did not settle; ``table`` holds (omega, theta) rows."""

    def __init__(self, msg, table):
        self.table = table
        super().__init__(msg)


class DerivativeError(ScatteringError, ArithmeticError):
    pass


class NodeProximityError(ScatteringError, ArithmeticError):
    pass


class IntegrationError(ScatteringError, RuntimeError):
    """Trajectory integration gave up; ``partial`` carries the path so far."""

    def __init__(self, msg, partial=None):
        self.partial = partial
        super().__init__(msg)


class BracketError(ScatteringError, ValueError):
    pass
