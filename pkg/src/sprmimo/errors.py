"""Exception types raised by the simulator."""


class SimulationError(Exception):
    """Base class for all simulator errors."""


class ConfigurationError(SimulationError, ValueError):
    """Invalid or unsupported scenario parameters."""


class SingularityError(SimulationError, ArithmeticError):
    """A Gram matrix that must be inverted is (numerically) singular."""


class DegenerateChannelError(SimulationError, ArithmeticError):
    """A precoder normalization factor vanished."""
