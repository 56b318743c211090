"""Exception types shared across the package."""


class GaffneyLabError(Exception):
    """Base class for all errors raised by gaffney_lab."""


class InvalidParameter(GaffneyLabError, ValueError):
    pass


class InvalidInput(GaffneyLabError, ValueError):
    pass


class InvalidSpec(GaffneyLabError, ValueError):
    """A boundary specification is incomplete or has a vanishing direction field."""


class OutOfDomain(GaffneyLabError, ValueError):
    pass


class AssemblyError(GaffneyLabError):
    pass


class EmptyConstraintSpace(GaffneyLabError):
    """The admissible discrete space has no free parameters."""


class InversionFailure(GaffneyLabError):
    pass


class ShrinkRadius(GaffneyLabError):
    """The flow leaves its safety box; ``max_radius`` is the largest radius that passed."""

    def __init__(self, message, max_radius):
        super().__init__(message)
        self.max_radius = max_radius
