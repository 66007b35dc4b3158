"""Exception hierarchy.

Every error raised on purpose by this package derives from
:class:`VortexTunnelError`, so callers (and the CLI) can map a failure to a
category without string matching.
"""


class VortexTunnelError(Exception):
    """Base class for all package errors."""

    category = "error"
    exit_code = 1


class DomainError(VortexTunnelError, ValueError):
    """An input lies outside the domain of a formula."""

    category = "domain"
    exit_code = 2


class SingularCircuitError(DomainError):
    """A circuit inductance combination vanishes."""


class AboveDepairingError(DomainError):
    """Current density exceeds the depairing limit; no superconducting branch."""


class QuantizationError(DomainError):
    """The integrated driving force is not a whole number of momentum quanta."""


class ProfileError(DomainError):
    """A tabulated drive or mass profile is malformed or inconsistent."""


class ConfigError(VortexTunnelError, ValueError):
    """Invalid run configuration."""

    category = "config"
    exit_code = 2


class IncompleteGridError(VortexTunnelError, ValueError):
    """A mode sum was requested with some k_x slots missing."""

    category = "grid"
    exit_code = 3


class InitializationError(VortexTunnelError):
    """Vacuum initial conditions cannot be imposed at the requested time."""

    category = "integration"
    exit_code = 3


class StepSizeError(VortexTunnelError, ValueError):
    """The time step violates the accuracy guard omega_max * dt <= 0.5."""

    category = "integration"
    exit_code = 3


class IntegrationError(VortexTunnelError):
    """Wronskian drift exceeded the hard failure threshold."""

    category = "integration"
    exit_code = 3


class ConvergenceError(VortexTunnelError):
    """The dt-halving loop did not converge."""

    category = "convergence"
    exit_code = 4

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history or [])


class SweepError(VortexTunnelError):
    """A sweep point failed; ``partial`` holds the results obtained so far."""

    category = "sweep"
    exit_code = 4

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class FitDomainError(VortexTunnelError, ValueError):
    """Transport values cannot be fitted on a log scale."""

    category = "fit"
    exit_code = 5


class SeriesGapError(VortexTunnelError, ValueError):
    """A sampled time series has a hole or does not span the window."""

    category = "observables"
    exit_code = 3


class OutputError(VortexTunnelError, OSError):
    """Writing one or more output files failed; ``failures`` maps path -> reason."""

    category = "io"
    exit_code = 6

    def __init__(self, failures):
        self.failures = dict(failures)
        lines = "; ".join(f"{p}: {why}" for p, why in self.failures.items())
        super().__init__(f"could not write {len(self.failures)} file(s): {lines}")
