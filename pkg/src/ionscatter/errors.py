"""Exception types raised across the simulator.

Two broad families matter to callers: configuration/validation problems
(bad user input, rejected before any numerics run) and numerical failures
(solver breakdowns on structurally valid input).  The CLI maps the former
to exit code 1 and the latter to exit code 2.
"""


class ValidationError(ValueError):
    """Input violates a documented precondition (non-positive rate, bad range...)."""


class ConfigError(ValueError):
    """Config document is malformed or violates the schema."""


class SimulationError(Exception):
    """Base class for numerical failures."""


class DimensionError(SimulationError):
    """Matrix/vector shapes are incompatible."""


class SingularMatrixError(SimulationError):
    """Linear solve hit a pivot below the singularity threshold."""


class DegenerateKernelError(SimulationError):
    """Null-space extraction found a kernel of dimension != 1."""


class FrameError(SimulationError):
    """No consistent rotating frame exists for the laser-link graph."""


class StiffnessError(SimulationError):
    """Time integration would require an unreasonably small step."""


class ScanError(SimulationError):
    """A parameter scan failed at a specific axis value."""


class FitError(SimulationError):
    """Least-squares fit did not converge."""


class AmbiguousPeakError(FitError):
    """Data shows more than one significant extremum; fit refused."""


class CalibrationError(SimulationError):
    """Lock-in phase calibration found no modulation to lock onto."""


class WeakProbeWarning(UserWarning):
    """Probe drive is strong enough that the linear response treatment degrades."""
