"""Exception taxonomy shared across the package."""


class SpinCascadeError(Exception):
    """Base class for all package errors."""


class ArgumentError(SpinCascadeError, ValueError):
    """Invalid argument to an operation (wrong axis, dimension, sign...)."""


class ModelError(SpinCascadeError):
    """Physically inconsistent model input (non-Hermitian H, broken pairing...)."""


class ConfigError(SpinCascadeError):
    """Bad run configuration; message names the offending key or field."""


class ToleranceInfeasibleError(ConfigError):
    """Requested tolerance is below what the numerics can certify."""


class NumericalIntegrityError(SpinCascadeError):
    """A propagated state violated trace/Hermiticity/positivity gates.

    Carries the first offending grid time in `t_offending`.
    """

    def __init__(self, message, t_offending=None):
        super().__init__(message)
        self.t_offending = t_offending


class EigenSolverError(SpinCascadeError):
    """Dense eigensolver failed to converge or certify residuals."""


class DegeneracyError(SpinCascadeError):
    """No physical state could be extracted from a null space."""


class NoRelaxationError(SpinCascadeError):
    """Steady-state formulas undefined because all relaxation rates vanish."""


class ResolutionError(SpinCascadeError):
    """Time grid too coarse for the requested detection."""


class FitQualityError(SpinCascadeError):
    """Decay fit rejected; message carries the residual diagnostics."""
