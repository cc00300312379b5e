"""Exception types shared across the package."""


class DomainError(ValueError):
    """Input outside the validated range of a psychrometric formula."""


class InfeasibleVpdError(ValueError):
    """Requested VPD cannot be realized with RH in [0, 100].

    Carries the achievable VPD range so callers can report or re-target.
    """

    def __init__(self, message, vpd_min=0.0, vpd_max=None):
        super().__init__(message)
        self.vpd_min = vpd_min
        self.vpd_max = vpd_max


class ConfigError(ValueError):
    """Bad scenario/controller configuration (unknown key, invalid value)."""


class SimulationFault(RuntimeError):
    """Simulation cannot proceed (NaN state, bad dt). Carries the sim clock."""

    def __init__(self, message, clock=None):
        super().__init__(message)
        self.clock = clock


class AutotuneError(RuntimeError):
    """Relay autotuning failed to find a sustained oscillation."""


class BoundActiveError(ValueError):
    """Marginal analysis requested at a setpoint pinned to a box bound."""
