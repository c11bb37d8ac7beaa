"""Exception types shared across the package."""


class VacuumProbeError(Exception):
    """Base class for all package-specific errors."""


class DimensionMismatchError(VacuumProbeError):
    """Operands live on incompatible Hilbert spaces."""


class TruncationError(VacuumProbeError):
    """A Fock-space truncation discards too much probability."""


class UnnormalizedStateError(VacuumProbeError):
    """An operation requiring a normalized (or physical) state got an invalid one."""


class ToleranceNotMetError(VacuumProbeError):
    """The adaptive integrator could not satisfy the requested tolerance."""


class ConfigError(VacuumProbeError):
    """A run configuration file is malformed or inconsistent."""
