"""Exception hierarchy shared by all modules."""


class SensingError(ValueError):
    """Base class for every error raised by :mod:`bergman_sense`."""


class DomainError(SensingError):
    """Inputs live on incompatible domains (centers, discs, regions)."""


class OrderError(SensingError):
    """A requested order exceeds what the data supports."""


class SingularMapError(SensingError):
    """A map has a vanishing derivative where it must be invertible."""


class BudgetExceededError(SensingError):
    """A search hit its guard without meeting the tolerance."""


class ConvergenceError(SensingError):
    """An iterative solve failed to converge."""


class ProbeError(SensingError):
    """A probe domain could not be built or its map could not be expanded."""


class CurveError(SensingError):
    """A pole-pushing curve is degenerate or violates a step constraint."""
