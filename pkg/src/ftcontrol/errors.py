"""Exception types shared across the package."""


class FtControlError(Exception):
    """Base class for all package-specific errors."""


class SimulationDivergedError(FtControlError):
    """A state or belief became non-finite during integration."""

    def __init__(self, message, step=None):
        self.step = step
        if step is not None:
            message = f"{message} (step {step})"
        super().__init__(message)


class IllConditionedKernelError(FtControlError):
    """Cholesky factorization of the GPR kernel matrix failed.

    Usually fixable by raising the kernel noise variance.
    """


class CalibrationError(FtControlError):
    """Residual calibration produced a non-PD covariance."""


class ConfigError(FtControlError):
    """Scenario configuration is malformed or contains unknown keys."""


class UndefinedModeError(FtControlError):
    """Gamma mode requested for a distribution with shape <= 1."""
