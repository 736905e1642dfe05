"""Exception hierarchy shared by all modules."""


class DegenRelaxError(Exception):
    """Base class for every error raised by this package."""


class OutOfDomain(DegenRelaxError, ValueError):
    pass


class NonIntegrable(DegenRelaxError, ArithmeticError):
    """A padded improper integral failed to settle."""


class MissingDerivative(DegenRelaxError):
    pass


class EmptyDecomposition(DegenRelaxError):
    """The weight has no interval on which 1/w is locally bounded (N_w = 0)."""

    n_w = 0


class NotCompactlyContained(DegenRelaxError, ValueError):
    pass


class OrderingViolation(DegenRelaxError, ValueError):
    pass


class NotInDomain(DegenRelaxError):
    pass


class HypothesisViolated(DegenRelaxError):
    pass


class ScheduleUnreachable(DegenRelaxError):
    pass


class HNotAdmissible(DegenRelaxError, ValueError):
    pass


class ConvergenceNotEstablished(DegenRelaxError):
    pass


class BadParameters(DegenRelaxError, ValueError):
    pass


class NotPositive(DegenRelaxError, ValueError):
    pass


class SpecParseError(DegenRelaxError, ValueError):
    """A weight or function spec document could not be understood."""


class PlotIOError(DegenRelaxError, OSError):
    pass
