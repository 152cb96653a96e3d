"""Exception types shared across the simulator."""


class PTCavityError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParameterError(PTCavityError, ValueError):
    """A parameter is outside the validity range of the requested operation."""


class InstabilityError(PTCavityError):
    """The system has an amplifying supermode, so no steady state exists."""


class TransitionSingularityError(PTCavityError):
    """The requested quantity diverges (or vanishes as a limit) exactly at the
    coalescence point g1 = (d1 - d2)/2."""


class BalancedGainError(PTCavityError):
    """Gain exactly balances loss; the requested ratio is infinite."""


class DivergenceError(PTCavityError):
    """Time integration blew up (missed instability or step size too large)."""


class PoorFitError(PTCavityError):
    """Harmonic fit residual is too large for the result to be trusted."""


class ResolutionError(PTCavityError):
    """Frequency grid too coarse to resolve a detected spectral feature."""


class DegenerateReferenceError(PTCavityError):
    """Reference sideband power is numerically zero; contrast ratio undefined."""


class ConfigError(PTCavityError):
    """Run configuration could not be parsed or failed validation."""
