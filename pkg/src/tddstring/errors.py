"""Exception hierarchy shared by every module of the package."""


class TddError(Exception):
    """Base class for all package errors."""


class NotPSD(TddError):
    """A symmetric matrix that must be positive semidefinite is not."""


class NonFinite(TddError):
    """A computation produced NaN or infinite entries."""


class DimensionMismatch(TddError):
    """Array shapes are incompatible."""


class NegativeTime(TddError):
    """A causal kernel was evaluated at negative time."""


class UndefinedAtZero(TddError):
    """The odd extension is discontinuous at zero and has no value there."""


class PoleOnAxis(TddError):
    """A transform was evaluated on a real-axis singularity."""


class TailNotResolved(TddError):
    """The frequency cutoff is too small for the dissipation tail."""


class LightConeViolation(TddError):
    """The spatial string is too short for the requested horizon."""


class SolverDiverged(TddError):
    """A time step's implicit solve failed to converge."""


class SingularStep(TddError):
    """The marching matrix of the convolution solver is singular."""


class UnderSampled(TddError):
    """Too few samples per carrier period."""


class WindowTooShort(TddError):
    """Averaging window does not cover enough carrier periods."""


class NotLossless(TddError):
    """A lossless formula was requested at a dissipative frequency."""


class GridTooCoarse(TddError):
    """Spatial grid does not resolve the drive wavelength."""


class ConfigInvalid(TddError):
    """Scenario configuration is malformed; ``key`` names the offender."""

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


class PdcFailed(TddError):
    """The power dissipation condition fails for the configured model."""


class NoArtifacts(TddError):
    """An artifact directory holds nothing to summarize."""
