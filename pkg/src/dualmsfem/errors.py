"""Exception types shared across the package."""


class DualMsError(Exception):
    """Base class for all package errors."""


class GridError(DualMsError):
    """Invalid grid parameters or neighborhood queries."""


class FieldError(DualMsError):
    """Bad coefficient data (wrong shape, non-finite, wrong sign)."""


class AssemblyError(DualMsError):
    """Assembly precondition violated."""


class SolverError(DualMsError):
    """Linear solve failed or did not reach the required residual."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class SpectralError(DualMsError):
    """Local eigenvalue problem could not be solved reliably."""


class ConfigError(DualMsError):
    """Malformed configuration file or option combination."""
