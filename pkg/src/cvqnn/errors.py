"""Exception hierarchy for the simulator."""


class SimulatorError(Exception):
    """Base class for all simulator errors."""


class InvalidCutoffError(SimulatorError, ValueError):
    """Cutoff dimension too small or otherwise unusable."""


class ShapeMismatchError(SimulatorError, ValueError):
    """Operator/state dimensions are incompatible."""


class InvalidTargetError(SimulatorError, ValueError):
    """Gate target modes are repeated or out of range."""


class ImpossibleOutcomeError(SimulatorError):
    """A measurement outcome with (numerically) zero probability was requested."""


class LeakageError(SimulatorError):
    """Accumulated cutoff leakage exceeded the configured budget."""

    def __init__(self, message, events=None):
        super().__init__(message)
        self.events = events or []


class StallError(SimulatorError):
    """Repeat-until-success loop failed to terminate within max_loops."""


class DegenerateTargetError(SimulatorError, ValueError):
    """Target-state construction produced a (near-)zero vector."""


class InsufficientCutoffError(SimulatorError, ValueError):
    """State construction did not converge at the given cutoff."""


class InvalidGridError(SimulatorError, ValueError):
    """Phase-space grid specification is malformed."""


class IncompatibleGridError(SimulatorError, ValueError):
    """Two grids that must match differ in bounds, size, or hbar."""


class DataFormatError(SimulatorError, ValueError):
    """Input data file is malformed (CSV/IDX parse failures)."""
