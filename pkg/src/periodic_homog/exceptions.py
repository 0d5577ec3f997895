"""Exception types raised across the package."""


class DimensionMismatch(ValueError):
    """Matrix shapes do not agree with the set or density they are used with."""


class NotCompactlyContained(ValueError):
    """A sample set reaches the boundary of the constraint set (gauge >= 1)."""


class PreconditionError(ValueError):
    pass


class ProjectionNotConverged(RuntimeError):
    """Dykstra iteration for the polytope distance did not reach tolerance."""


class InfeasibleMacroGradient(ValueError):
    """Macroscopic gradient lies on or outside the boundary of the domain."""


class UndecidedLimit(RuntimeError):
    """A radial probe neither settled nor blew up on its ladder."""


class TilingMismatch(ValueError):
    pass
