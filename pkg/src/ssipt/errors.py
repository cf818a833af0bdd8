"""Exception hierarchy for the workbench.

Domain errors (bad physics, infeasible designs, solver blow-ups) are kept
separate from configuration errors so the CLI can map them to distinct
exit codes (1 vs 2).
"""


class WorkbenchError(Exception):
    """Base class for all workbench errors."""


class DomainError(WorkbenchError, ValueError):
    """A physical or numerical precondition was violated."""


class ResonantShortCircuitError(DomainError):
    """Primary tank is resonant and unloaded: series impedance collapses."""


class UndefinedImpedanceError(DomainError):
    """Input impedance requested with zero inverter current."""


class GeometryError(DomainError):
    """Coupler geometry is self-intersecting or otherwise unbuildable."""


class FilamentSingularityError(DomainError):
    """Two filament loops approach closer than the integration can resolve."""


class CalibrationError(DomainError):
    """Permeability calibration failed to converge; carries the residual."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class DivergenceError(DomainError):
    """Transient state magnitude exceeded the runaway threshold."""


class InfeasibleDesignError(DomainError):
    """Requested design constraints cannot be met."""


class ConfigError(WorkbenchError):
    """Configuration text is invalid. Carries a line number when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
