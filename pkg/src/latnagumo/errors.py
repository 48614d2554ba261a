"""Exception types shared across the package."""


class LatNagumoError(Exception):
    pass


class DimensionError(LatNagumoError, ValueError):
    pass


class EvaluationError(LatNagumoError, ValueError):
    pass


class NonFiniteStateError(LatNagumoError, ValueError):
    pass


class DegenerateStencilError(LatNagumoError, ValueError):
    pass


class ContractError(LatNagumoError, RuntimeError):
    pass


class NoCrossingError(LatNagumoError):
    pass


class InsufficientDataError(LatNagumoError, ValueError):
    pass


class BlowUpError(LatNagumoError, FloatingPointError):
    """Raised when a time step produces a non-finite value."""

    def __init__(self, step: int, t: float, last_state=None):
        super().__init__(f"non-finite state at step {step} (t={t:g})")
        self.step = step
        self.t = t
        self.last_state = last_state


class CutoffWarning(UserWarning):
    """Front midpoint lies outside the truncated domain."""


class ConfigError(LatNagumoError, ValueError):
    pass
