"""Exception and warning types raised by the simulator."""


class SimulationError(Exception):
    """Base class for numeric failures inside the engines."""


class StabilityError(SimulationError, ValueError):
    """Round-trip ray matrix outside the stable range |A + D| / 2 <= 1."""


class UnsupportedConfigurationError(SimulationError, ValueError):
    """Optical configuration that the propagator does not handle (B = 0)."""


class ResolutionError(SimulationError, ValueError):
    """Sampling grid too coarse for the requested transform."""


class GeometryError(SimulationError, ValueError):
    """No pinhole radius solves the balance condition on the given grid."""


class ExtrapolationError(SimulationError, ValueError):
    """Requested radius lies outside the sampled field."""


class IntegratorError(SimulationError, RuntimeError):
    """Time integration failed."""


class GapClosedError(SimulationError, ValueError):
    """A quasienergy gap is closed, so the winding number is undefined."""


class StepCountError(SimulationError, RuntimeError):
    """Propagator lost unitarity; more time slices are needed."""


class NearSingularWarning(RuntimeWarning):
    """Resolvent close to singular (undamped mode on resonance)."""


class ConvergenceWarning(RuntimeWarning):
    """Replica truncation or k-grid not converged to the requested tolerance."""


class SpectralLeakageWarning(RuntimeWarning):
    """Time window too short for the slowest decay."""
