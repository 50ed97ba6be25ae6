"""Exceptions raised by the steady-state toolkit."""


class SteadySqueezeError(Exception):
    """Base class for all toolkit errors."""


class BasisMismatchError(SteadySqueezeError, ValueError):
    """Operands live on different Hilbert bases."""


class HermiticityError(SteadySqueezeError, ValueError):
    """A matrix flagged as Hermitian is not."""


class StateNormalizationError(SteadySqueezeError, ValueError):
    """A state does not have unit norm or unit trace."""


class InvalidSpinError(SteadySqueezeError, ValueError):
    """Spin length incompatible with the emitter count."""


class DimensionCapError(SteadySqueezeError, ValueError):
    """Requested space exceeds the configured size caps."""


class ModelError(SteadySqueezeError, ValueError):
    """Invalid model parameters or model misuse."""


class ConfigError(SteadySqueezeError, ValueError):
    """Invalid scan configuration."""


class FrameUndefinedError(SteadySqueezeError, ValueError):
    """Mean spin too small to define a transverse frame."""


class PerturbationError(SteadySqueezeError, ValueError):
    """Perturbative equations are singular or their assumptions fail."""


class SolverConvergenceError(SteadySqueezeError, RuntimeError):
    """Steady-state solver did not reach the requested tolerance."""


class NonUniqueSteadyStateError(SteadySqueezeError, RuntimeError):
    """The Liouvillian has a multi-dimensional null space."""
